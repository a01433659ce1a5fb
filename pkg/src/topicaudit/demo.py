"""Deterministic SMS-style demo corpus.

Generates a labeled spam/ham TSV from templates.  Deliberately
ambiguous subpopulations keep a well-trained classifier imperfect:
"hard ham" borrows promotional vocabulary in mundane contexts, "soft
spam" hides solicitations in conversational phrasing, and a shared
"forwarded promo" texture appears under both labels with inverted
intensity.  The resulting errors are needed downstream, where
misclassified messages are contrasted against the profiles of
correctly classified ones.

Run ``python3 -m topicaudit.demo --out sms.tsv`` to materialize it.
"""

from __future__ import annotations

import argparse
import re

import numpy as np

_SLOT_RE = re.compile(r"\{(\w+)\}")

HAM_TEMPLATES = (
    "hey {name} are we still meeting at {place} on {day}",
    "running late will be there by {hour} sorry",
    "can you pick up {food} on your way home",
    "just finished the {activity} session feeling great",
    "{name} said the {item} is ready for collection tomorrow",
    "what time does the {place} close tonight",
    "lol that was hilarious tell {name} about it",
    "mum wants to know if you are coming for dinner on {day}",
    "the meeting moved to {hour} let {name} know please",
    "i left my {item} at your place can you bring it",
    "happy birthday {name} hope you have a lovely day",
    "traffic on the bridge is terrible leave before {hour}",
    "did you watch the match last night what a finish",
    "the doctor appointment is confirmed for {day} at {hour}",
    "thanks for helping with the {activity} yesterday really appreciated",
    "shall we try that new {food} place near {place}",
    "my train gets in at {hour} see you at the station",
    "dont forget to feed the cat before you leave",
    "the lecture on {day} was cancelled professor is ill",
    "can i borrow your {item} for the weekend",
    "good luck with the exam {name} you will do fine",
    "we are out of milk and bread grabbing some now",
    "movie starts at {hour} meet outside {place}",
    "the kids loved the {activity} we should go again",
    "sorry missed your call was in a meeting all afternoon",
    "how did the interview go {name} been thinking of you",
    "package arrived today the {item} looks great thanks",
    "raining here again hope it clears up by {day}",
    "reminder landlord coming to inspect the flat on {day}",
    "going for a run around {place} join me if you like",
    "nan says hello she is knitting you a jumper",
    "lets do coffee at {hour} i have news",
    "my laptop died again taking it to the shop on {day}",
    "the recipe needs {food} and two eggs nothing fancy",
    "see you at {place} after work usual spot",
    "forgot my umbrella and got soaked typical monday",
    "the plumber fixed the boiler finally warm again",
    "are you awake fancy a late {food} run",
    "homework question what page was the {activity} exercise on",
    "booked the table for {hour} on {day} under my name",
)

HARD_HAM_BASES = (
    "are you free tonight fancy seeing {name}",
    "i won the pub quiz last night drinks on me",
    "call me when you leave {place} ok",
    "the gym offer ends {day} worth a look",
    "bought a scratch card for a laugh at {place}",
    "mum keeps forwarding me competition things again",
    "free cake in the office kitchen come quick",
    "text me back about {day} plans need a headcount",
    "{name} won the raffle at work can you believe it",
    "my new number save it and text me later",
    "the shop by {place} is doing a prize draw entered us",
    "reply tonight so i can book the table for {day}",
)

# Promotional fragments for the ambiguous subpopulations.  The quiet
# bits reuse the exact word vocabulary of the loud templates but carry
# none of their shouting, digits, currency or urls: textually spammy,
# structurally plain.  Hard hams and forwarded promos append a random
# handful each, so those subpopulations straddle the decision boundary
# instead of sitting neatly on one side.
QUIET_SPAM_BITS = (
    "free prize",
    "winner alert",
    "you won cash",
    "claim your reward",
    "urgent prize claim",
    "guaranteed cash",
    "free entry draw",
    "bonus voucher",
    "unclaimed prize",
    "lottery winner",
    "win free cash",
    "claim now",
)

LOUD_SPAM_BITS = (
    "FREE",
    "WINNER",
    "£{amount} prize",
    "URGENT",
    "call {phone} now",
    "text WIN to {shortcode}",
    "your reward code {code}",
)

SPAM_TEMPLATES = (
    "WINNER you have won a £{amount} prize GUARANTEED call {phone} now",
    "URGENT your mobile number has won £{amount} claim code {code} call {phone}",
    "FREE entry in our weekly draw text WIN to {shortcode} to claim your £{amount}",
    "congratulations you are selected for a {brand} gift card worth £{amount} claim at {url}",
    "you have been chosen for a FREE {brand} upgrade call {phone} before {day}",
    "CASH prize alert £{amount} waiting for you text CLAIM to {shortcode} now",
    "final notice your £{amount} reward expires today visit {url} immediately",
    "exclusive offer FREE ringtones and vouchers text TONE to {shortcode} now",
    "your account is due a £{amount} refund click {url} to receive payment",
    "GUARANTEED loan approval up to £{amount} no credit check call {phone}",
    "hot singles in your area waiting text MEET to {shortcode} FREE trial",
    "you won a holiday to spain worth £{amount} call {phone} to book claim {code}",
    "STOP paying full price FREE {brand} handset when you reply to this msg",
    "lottery alert ticket {code} matched call {phone} to claim £{amount} today",
    "URGENT reply within 24hrs to claim your FREE {brand} voucher worth £{amount}",
    "win a {brand} phone every hour text PLAY to {shortcode} 150p per msg",
    "your entry {code} won 2nd prize of £{amount} claim now at {url}",
    "FREE msg get unlimited texts for £{smallamount} a month reply YES to activate",
    "important customer reward £{amount} shopping spree call {phone} quote {code}",
    "double your airtime FREE this weekend only visit {url} terms apply",
    "ALERT unclaimed prize of £{amount} in your name text GRAB to {shortcode}",
    "christmas special FREE {brand} tablet with any order at {url} hurry",
    "you qualify for a government grant of £{amount} call {phone} today",
    "last chance claim your £{amount} bonus credit at {url} code {code}",
    "VIP club invite FREE gifts weekly text JOIN to {shortcode} 18+ only",
)

SOFT_OPENERS = (
    "hey its {name} here",
    "hi sorry to bother you",
    "hello again hope you are well",
    "hey quick one",
    "hi we spoke at {place} last week",
    "hey {name} passed me your number",
)

SOFT_PITCHES = (
    "i can show you how to earn a bit extra from home text me back",
    "the survey panel pays for opinions your voucher is ready reply to arrange",
    "about that work from home role are you still interested reply yes",
    "a friend showed me a trick for lower bills want details text back",
    "you were recommended for a paid study easy money reply for details",
    "your parcel could not be delivered reply with your postcode to rebook",
    "about the investment chat from the fair text me when you are around",
    "your subscription trial ends {day} reply stop or it continues",
    "following up on your competition entry from last week reply to confirm",
    "someone has a crush on you reply to find out who",
    "we buy old handsets for decent money reply sell for a quote",
    "your loyalty points expire soon reply swap to get vouchers",
)

POOLS = {
    "name": ("sam", "alex", "jo", "priya", "tom", "lucy", "dan", "meg",
             "ravi", "kate", "ben", "nina", "ollie", "fran", "george"),
    "place": ("the library", "the gym", "tesco", "the park", "campus",
              "the cinema", "town", "the office", "the cafe", "the station"),
    "day": ("monday", "tuesday", "wednesday", "thursday", "friday",
            "saturday", "sunday"),
    "hour": ("noon", "1pm", "3pm", "five", "6pm", "7pm", "8pm", "half nine"),
    "food": ("pizza", "curry", "noodles", "chips", "sushi", "pasta",
             "kebab", "salad"),
    "activity": ("yoga", "spin", "swim", "revision", "band practice",
                 "five a side"),
    "item": ("charger", "jacket", "textbook", "keys", "headphones",
             "umbrella"),
    "brand": ("nokia", "orange", "vodafone", "tmobile", "argos"),
    "smallamount": ("5", "10", "15", "20", "25"),
}


def _fill(template: str, rng: np.random.Generator) -> str:
    def draw(match: re.Match) -> str:
        slot = match.group(1)
        if slot == "amount":
            return str(int(rng.integers(1, 40)) * 250)
        if slot == "phone":
            return "0" + "".join(str(int(d)) for d in rng.integers(0, 10, 10))
        if slot == "shortcode":
            return "".join(str(int(d)) for d in rng.integers(1, 10, 5))
        if slot == "code":
            return "K" + "".join(str(int(d)) for d in rng.integers(0, 10, 4))
        if slot == "url":
            host = "".join(chr(97 + int(c)) for c in rng.integers(0, 26, 6))
            return f"www.{host}.co.uk"
        pool = POOLS[slot]
        return pool[int(rng.integers(0, len(pool)))]

    return _SLOT_RE.sub(draw, template)


def _bucket(templates: tuple[str, ...], count: int,
            rng: np.random.Generator) -> list[str]:
    # Cycle templates before repeating so small buckets stay diverse.
    order = rng.permutation(len(templates))
    out = []
    for i in range(count):
        out.append(_fill(templates[int(order[i % len(templates)])], rng))
        if (i + 1) % len(templates) == 0:
            order = rng.permutation(len(templates))
    return out


def _pick(pool: tuple[str, ...], rng: np.random.Generator) -> str:
    return _fill(pool[int(rng.integers(0, len(pool)))], rng)


def _hard_ham(rng: np.random.Generator) -> str:
    bits = " ".join(_pick(QUIET_SPAM_BITS, rng)
                    for _ in range(int(rng.integers(2, 6))))
    return f"{_pick(HARD_HAM_BASES, rng)} {bits}"


def _promo_chatter(rng: np.random.Generator, k_lo: int, k_hi: int) -> str:
    # Forwarded-promo texture shared by both labels: everyday chatter
    # quoting quiet promotional wording.  Ham forwards quote MORE of it
    # than the genuine quiet solicitations do, so no monotone word rule
    # separates the labels and the boundary lands inside both tails.
    base = _pick(HAM_TEMPLATES, rng)
    bits = " ".join(_pick(QUIET_SPAM_BITS, rng)
                    for _ in range(int(rng.integers(k_lo, k_hi + 1))))
    text = f"{base} {bits}"
    if rng.random() < 0.5:
        text = f"{text} reply for details"
    return text


def _soft_spam(rng: np.random.Generator) -> str:
    text = f"{_pick(SOFT_OPENERS, rng)} {_pick(SOFT_PITCHES, rng)}"
    for _ in range(int(rng.integers(0, 2))):
        text = f"{text} {_pick(LOUD_SPAM_BITS, rng)}"
    return text


def generate(n_messages: int = 1600, spam_rate: float = 0.134,
             seed: int = 7) -> list[tuple[str, str]]:
    """Return (label, text) rows in a deterministic shuffled order."""
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    n_spam = round(n_messages * spam_rate)
    n_ham = n_messages - n_spam
    n_soft = round(n_spam * 0.10)
    n_promo_spam = round(n_spam * 0.11)
    n_promo_ham = round(n_ham * 0.02)
    n_hard = round(n_ham * 0.04)

    rows = [("ham", t) for t in
            _bucket(HAM_TEMPLATES, n_ham - n_hard - n_promo_ham, rng)]
    rows += [("ham", _hard_ham(rng)) for _ in range(n_hard)]
    rows += [("ham", _promo_chatter(rng, 5, 9)) for _ in range(n_promo_ham)]
    rows += [("spam", t) for t in
             _bucket(SPAM_TEMPLATES, n_spam - n_soft - n_promo_spam, rng)]
    rows += [("spam", _promo_chatter(rng, 3, 7))
             for _ in range(n_promo_spam)]
    rows += [("spam", _soft_spam(rng)) for _ in range(n_soft)]
    return [rows[int(i)] for i in rng.permutation(len(rows))]


def write_tsv(path: str, rows: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for label, text in rows:
            fh.write(f"{label}\t{text}\n")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python3 -m topicaudit.demo",
        description="Write a deterministic spam/ham demo corpus as TSV.")
    parser.add_argument("--out", required=True, help="output TSV path")
    parser.add_argument("--size", type=int, default=1600)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    write_tsv(args.out, generate(n_messages=args.size, seed=args.seed))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
