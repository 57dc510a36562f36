"""Seeded synthetic general-QA corpus for base training.

A stand-in for a large open-domain reading-comprehension set: a dozen
everyday topics (shipping, travel, ground transport, schedules, dining,
tickets, weather, relocation, sports, library, banking, hotels), each a
bank of sentence frames with typed value slots. Contexts are one or two
rendered frames; questions ask one slot (answerable, with the exact
character span) or a slot absent from the context (unanswerable), with
about a third of questions unanswerable — including hard negatives whose
slot type is present under a different role, e.g. asking for a departure
city when the context only names an arrival city.

The point is to teach question-conditioned span extraction anchored by
ordinary English regularities ("from X", "to Y", "on monday", "in the
morning", "flight 212", "serves lunch"), so a model trained here can
extract from unseen sentences in unseen domains. Entity pools include
one-off invented place names so the model also learns to extract
out-of-vocabulary answers from their surroundings.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Mapping

from .squad import QaRecord

# ---------------------------------------------------------------------------
# Shared value banks

CITIES = (
    "san jose", "boston", "chicago", "denver", "seattle", "portland", "austin",
    "atlanta", "dallas", "houston", "phoenix", "detroit", "memphis", "tampa",
    "orlando", "baltimore", "pittsburgh", "philadelphia", "charlotte",
    "milwaukee", "nashville", "columbus", "indianapolis", "oakland",
    "new york", "los angeles", "san francisco", "salt lake city",
    "new orleans", "fort worth", "kansas city", "st louis", "el paso",
    "las vegas", "tucson", "newark",
)

# Invented towns: each is rare, so encoded forms are often unknown and the
# model must rely on context to extract them.
NONCE_TOWNS = (
    "ashford", "brindle", "calverton", "dunmore", "eastvale", "farwell",
    "glenrock", "harlow", "ironridge", "juniper falls", "kestrel", "larkspur",
    "midvale", "norwick", "oakmont", "pellston", "quarry bend", "redwater",
    "stonegate", "tarrytown", "umberfield", "vanport", "westbrook", "yorkdale",
)

PLACES = CITIES * 3 + NONCE_TOWNS  # invented towns in roughly one draw in five

STATES = ("colorado", "texas", "california", "georgia", "ohio", "florida",
          "tennessee", "arizona", "oregon", "nevada", "utah", "iowa")

DAYS = ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
        "sunday")

MONTHS = ("january", "february", "march", "april", "may", "june", "july",
          "august", "september", "october", "november", "december")

ORDINALS = ("first", "second", "third", "fourth", "fifth", "sixth", "seventh",
            "eighth", "ninth", "tenth", "twelfth", "fifteenth", "seventeenth",
            "twentieth", "twenty first", "twenty second", "twenty fifth",
            "thirtieth")

PERIODS = ("morning", "afternoon", "evening", "night")

TIMES = ("5 pm", "noon", "10 am", "8:30 pm", "6:45 am", "midnight", "7:15 pm",
         "9 am", "4:30 pm", "11 pm")

MEALS = ("breakfast", "lunch", "dinner", "snack", "brunch", "supper")

CLASSES = ("first class", "coach", "business class", "economy",
           "premium economy")

FARE_TYPES = ("round trip", "one way", "refundable", "flexible")

COST_RANKS = ("cheapest", "lowest", "least expensive", "most expensive",
              "priciest", "mid range")

AIRLINES = ("american airlines", "united airlines", "delta", "continental",
            "us air", "northwest", "alaska airlines", "jetblue", "qantas",
            "air canada", "finnair", "iberia", "twa", "lufthansa")

AIRPORTS = ("logan airport", "love field", "sky harbor", "midway airport",
            "burbank field", "stapleton airport", "mercer field",
            "kenton field", "harbor point airport", "general mitchell",
            "lambert field", "lindbergh field")

TRANSPORTS = ("taxi", "bus", "rental car", "limousine", "shuttle", "train",
              "streetcar", "ferry")

NUMBERS = ("201", "343", "1039", "417", "98", "771", "555", "1222", "64",
           "880", "12", "307", "4501", "77", "263", "918", "30", "645")

AMOUNTS = ("45 dollars", "$120", "ninety euros", "300 dollars", "$79",
           "$15.50", "220 dollars", "$8")

COUNTS = ("two", "three", "four", "five", "six", "eight", "a dozen")


@dataclass(frozen=True)
class Topic:
    name: str
    frames: tuple[str, ...]
    banks: Mapping[str, tuple[str, ...]]
    questions: Mapping[str, tuple[str, ...]]


# Question phrasings reused wherever an attribute plays the same role.
_Q_ORIGIN = (
    "What is the departure city?",
    "Which city did it leave from?",
    "What is the origin city?",
    "Where was the departure from?",
    "What is the departure airport?",
)
_Q_DEST = (
    "What is the destination city?",
    "Which city is it heading to?",
    "What is the arrival city?",
    "Where is it going?",
    "What is the arrival airport?",
)
_Q_DAY = (
    "What is the day name?",
    "What day of the week is it?",
    "Which day is it?",
    "What is the travel day?",
    "What is the date (day name)?",
)
_Q_MONTH = (
    "What is the month name?",
    "In which month is it?",
    "What month is mentioned?",
    "What is the date (month name)?",
)
_Q_ORDINAL = (
    "What is the day number?",
    "Which day of the month is it?",
    "What day number is mentioned?",
    "What is the date (day number)?",
)
_Q_PERIOD = (
    "What is the period of day?",
    "What part of the day is it?",
    "When during the day?",
    "What is the time (period of day)?",
)
_Q_TIME_ARRIVE = (
    "What is the arrival time?",
    "What time does it arrive?",
    "When does it get in?",
)
_Q_TIME_START = (
    "What is the start time?",
    "What time does it begin?",
    "When does it start?",
)


TOPICS: tuple[Topic, ...] = (
    Topic(
        name="shipping",
        frames=(
            "the parcel left {origin} on {day} heading to {dest}",
            "a crate was shipped from {origin} to {dest}",
            "the courier left {origin} in the {period}",
            "tracking number {num} shows the box near {dest}",
            "it was sent on {day} and should reach {dest} soon",
            "the freight leaving {origin} was delayed",
            "the truck delivers to {dest} {state} on {day}",
            "when will the box reach {dest}",
        ),
        banks={
            "origin": PLACES, "dest": PLACES, "state": STATES, "day": DAYS,
            "period": PERIODS, "num": NUMBERS,
        },
        questions={
            "origin": _Q_ORIGIN,
            "dest": _Q_DEST,
            "state": ("What is the destination state?", "Which state is it in?",
                      "What is the state name?"),
            "day": ("What is the shipping day?",
                    "What is the delivery date (day name)?") + _Q_DAY,
            "period": _Q_PERIOD,
            "num": ("What is the tracking number?",
                    "Which number tracks the shipment?"),
        },
    ),
    Topic(
        name="travel",
        frames=(
            "she is flying from {origin} to {dest} next {day}",
            "our flight out of {origin} lands in {dest} at {time}",
            "the {airline} crew served {meal} after takeoff",
            "he booked a {cls} seat on a {rt} ticket",
            "flight {num} to {dest} boards in the {period}",
            "they arrive in {dest} before {time}",
            "the journey begins in {origin} on {day}",
            "{airline} operates the route to {dest}",
            "i need a seat to {dest} leaving {origin}",
            "list departures to {dest} for {day}",
            "what time do we land in {dest}",
            "direct flights to {dest} sell out every {day}",
            "{airline} flights rarely leave late",
            "check in early for {airline} flights",
            "{rt} flights are often cheaper",
        ),
        banks={
            "origin": PLACES, "dest": PLACES, "day": DAYS, "time": TIMES,
            "airline": AIRLINES, "meal": MEALS, "cls": CLASSES,
            "rt": FARE_TYPES, "num": NUMBERS, "period": PERIODS,
        },
        questions={
            "origin": _Q_ORIGIN,
            "dest": _Q_DEST,
            "day": ("What is the departure day?",) + _Q_DAY,
            "time": _Q_TIME_ARRIVE,
            "airline": ("What is the airline name?", "Which airline is it?",
                        "Who operates the flight?"),
            "meal": ("What is the meal description?", "What meal was served?",
                     "Which meal is it?"),
            "cls": ("What is the class type?", "What class is the seat?",
                    "Which cabin class is it?"),
            "rt": ("What is the round trip?",
                   "Is the ticket round trip or one way?",
                   "What is the ticket type?"),
            "num": ("What is the flight number?", "Which flight is it?"),
            "period": ("What is the departure period?",) + _Q_PERIOD,
        },
    ),
    Topic(
        name="ground",
        frames=(
            "take a {transport} from {airport} into downtown",
            "the {transport} to {dest} runs every hour",
            "from {airport} you can ride a {transport} to the hotel",
            "{airport} is twenty minutes from the city by {transport}",
            "shuttle {num} leaves {airport} at {time}",
            "how do i reach the stadium by {transport}",
        ),
        banks={
            "transport": TRANSPORTS, "airport": AIRPORTS, "dest": PLACES,
            "num": NUMBERS, "time": TIMES,
        },
        questions={
            "transport": ("What is the transport type?",
                          "What type of transport is available?",
                          "How do you get downtown?"),
            "airport": ("What is the airport name?", "Which airport is mentioned?",
                        "What airport does it leave from?"),
            "dest": _Q_DEST,
            "num": ("What is the shuttle number?", "Which shuttle is it?"),
            "time": ("What is the departure time?", "When does it leave?"),
        },
    ),
    Topic(
        name="events",
        frames=(
            "the recital is on {month} {ordinal}",
            "rehearsal happens on {day} in the {period}",
            "doors open at {time} on {month} {ordinal}",
            "the conference moved to {place} this year",
            "the workshop runs on {day} starting at {time}",
            "registration closes {month} {ordinal} at {time}",
        ),
        banks={
            "month": MONTHS, "ordinal": ORDINALS, "day": DAYS, "time": TIMES,
            "period": PERIODS, "place": PLACES,
        },
        questions={
            "month": _Q_MONTH,
            "ordinal": _Q_ORDINAL,
            "day": _Q_DAY,
            "time": _Q_TIME_START,
            "period": _Q_PERIOD,
            "place": ("What is the host city?", "Which city hosts it?"),
        },
    ),
    Topic(
        name="dining",
        frames=(
            "the cafe serves {meal} until {time}",
            "we booked a table for {count} on {day}",
            "their famous {dish} sells out by {time}",
            "brunch turns into {meal} after {time}",
            "the kitchen stops serving {meal} in the {period}",
            "does the dining car serve {meal}",
            "i want a table for {count} please",
            "i'd like to make a reservation for {count} on {day}",
        ),
        banks={
            "meal": MEALS, "time": TIMES, "count": COUNTS, "day": DAYS,
            "period": PERIODS,
            "dish": ("pasta", "grilled salmon", "roast chicken",
                     "veggie burgers", "clam chowder", "steak frites"),
        },
        questions={
            "meal": ("What is the meal description?", "What meal is served?",
                     "Which meal is it?"),
            "dish": ("What is the signature dish?", "What dish is famous?"),
            "count": ("What is the party size?",
                      "How many people is the table for?"),
            "time": ("What is the closing time?", "Until what time is it served?"),
            "day": ("What day is the booking?", "What is the reservation day?"),
            "period": _Q_PERIOD,
        },
    ),
    Topic(
        name="tickets",
        frames=(
            "she grabbed the {cost} fare available",
            "a {cls} upgrade cost {amount}",
            "the {rt} ticket was {amount}",
            "he paid {amount} for a {cls} seat",
            "the {cost} option was a {rt} ticket",
            "he searched all week to find a {cost} fare",
            "{cost} flights usually mean a {rt} purchase",
            "train {num} offers {cls} seating",
            "show me {cls} trains from {origin} to {dest}",
            "reserve a {cls} berth on train {num}",
        ),
        banks={
            "cost": COST_RANKS, "cls": CLASSES, "rt": FARE_TYPES,
            "amount": AMOUNTS, "num": NUMBERS, "origin": PLACES, "dest": PLACES,
        },
        questions={
            "cost": ("What is the relative cost?", "What is the cost category?",
                     "How is the fare ranked?"),
            "cls": ("What is the class type?", "What class did he pay for?",
                    "What is the seating class?"),
            "rt": ("What is the round trip?", "Is it round trip or one way?",
                   "What is the ticket type?"),
            "amount": ("What is the price?", "How much did it cost?"),
            "num": ("What is the train number?", "Which train is it?"),
            "origin": _Q_ORIGIN,
            "dest": _Q_DEST,
        },
    ),
    Topic(
        name="weather",
        frames=(
            "expect {cond} in {city} on {day}",
            "the {period} forecast calls for {cond}",
            "temperatures reach {temp} by the {period}",
            "{city} will see {cond} this {day}",
        ),
        banks={
            "cond": ("light rain", "heavy snow", "clear skies", "thick fog",
                     "strong winds", "a heat wave", "thunderstorms", "drizzle"),
            "city": PLACES, "day": DAYS, "period": PERIODS,
            "temp": ("68 degrees", "12 below", "90 degrees", "45 degrees"),
        },
        questions={
            "cond": ("What is the forecast?", "What weather is expected?"),
            "city": ("Which city is the forecast for?", "What city is mentioned?"),
            "day": ("What day is the forecast for?",) + _Q_DAY,
            "period": _Q_PERIOD,
            "temp": ("What is the temperature?", "How warm will it get?"),
        },
    ),
    Topic(
        name="relocation",
        frames=(
            "she has lived in {home} for years but is moving to {dest}",
            "he lives in {home} and visits {dest} every {month}",
            "home is {home} though work keeps pulling him to {dest}",
            "the office moved to {dest} {state} in {month}",
            "service expands to {dest} {state} next {month}",
        ),
        banks={
            "home": PLACES, "dest": PLACES, "state": STATES, "month": MONTHS,
        },
        questions={
            "home": ("Where does she live?", "What is the home city?",
                     "What city is home?", "What is the starting city?",
                     "Which city does the trip start from?"),
            "dest": _Q_DEST + ("Which city is he moving to?",),
            "state": ("What is the destination state?", "Which state is it?",
                      "What is the state name?"),
            "month": _Q_MONTH,
        },
    ),
    Topic(
        name="sports",
        frames=(
            "{team} host {rival} on {day} at {time}",
            "{team} travel to {city} for the {day} game",
            "kickoff against {rival} is at {time}",
        ),
        banks={
            "team": ("the hawks", "the rovers", "the comets", "the miners",
                     "the pilots", "the bears", "the wolves", "the giants"),
            "rival": ("the falcons", "the otters", "the badgers", "the rams",
                      "the herons", "the lynx"),
            "day": DAYS, "time": TIMES, "city": PLACES,
        },
        questions={
            "team": ("Who is the home team?", "Which team hosts?"),
            "rival": ("Who is the visiting team?",
                      "Which team are they playing?"),
            "day": ("What day is the game?",) + _Q_DAY,
            "time": ("What is the kickoff time?",) + _Q_TIME_START,
            "city": ("Which city are they traveling to?",
                     "What is the destination city?"),
        },
    ),
    Topic(
        name="library",
        frames=(
            "the book is due on {month} {ordinal}",
            "{title} was checked out on {month} {ordinal}",
            "card number {num} has two holds",
            "renewals close on {day}",
        ),
        banks={
            "month": MONTHS, "ordinal": ORDINALS, "day": DAYS, "num": NUMBERS,
            "title": ("the glass harbor", "a winter ledger", "maps of nowhere",
                      "the salt road", "letters from the coast"),
        },
        questions={
            "month": ("Which month is it due?",) + _Q_MONTH,
            "ordinal": _Q_ORDINAL,
            "day": ("What day do renewals close?", "What is the closing day?"),
            "num": ("What is the card number?", "Which card has holds?"),
            "title": ("What is the book title?", "Which book was borrowed?"),
        },
    ),
    Topic(
        name="banking",
        frames=(
            "a charge of {amount} posted on {month} {ordinal}",
            "{merchant} billed {amount} last {day}",
            "the refund of {amount} cleared in the {period}",
        ),
        banks={
            "amount": AMOUNTS, "month": MONTHS, "ordinal": ORDINALS,
            "day": DAYS, "period": PERIODS,
            "merchant": ("the corner market", "blue sky fuel", "harbor cafe",
                         "the hardware co-op", "city transit"),
        },
        questions={
            "amount": ("What is the charge amount?", "How much was charged?"),
            "merchant": ("Who billed the account?", "What is the merchant name?"),
            "month": _Q_MONTH,
            "ordinal": _Q_ORDINAL,
            "day": _Q_DAY,
            "period": _Q_PERIOD,
        },
    ),
    Topic(
        name="hotels",
        frames=(
            "we stayed {nights} at an inn near {city}",
            "the room for {count} ran {amount} a night",
            "checkout after {nights} was painless",
        ),
        banks={
            "nights": ("two nights", "a week", "three nights", "one night",
                       "five nights"),
            "city": PLACES, "count": COUNTS, "amount": AMOUNTS,
        },
        questions={
            "nights": ("How many nights did they stay?",
                       "What is the length of stay?"),
            "city": ("Which city was the inn near?",
                     "What city did they stay in?"),
            "count": ("How many guests were there?", "What is the guest count?"),
            "amount": ("What is the nightly rate?", "How much per night?"),
        },
    ),
)


_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


def _render(
    template: str,
    banks: Mapping[str, tuple[str, ...]],
    rng: random.Random,
    used_values: set[str],
) -> tuple[str, dict[str, tuple[int, int]]]:
    """Fill one frame; return the sentence and each slot's character span."""
    parts = _PLACEHOLDER_RE.split(template)
    pieces: list[str] = []
    spans: dict[str, tuple[int, int]] = {}
    cursor = 0
    for i, part in enumerate(parts):
        if i % 2 == 0:
            pieces.append(part)
            cursor += len(part)
        else:
            bank = banks[part]
            value = rng.choice(bank)
            for _ in range(12):
                if value not in used_values:
                    break
                value = rng.choice(bank)
            used_values.add(value)
            spans[part] = (cursor, cursor + len(value))
            pieces.append(value)
            cursor += len(value)
    return "".join(pieces), spans


def generate_general_qa(n_questions: int = 3600, seed: int = 11) -> list[QaRecord]:
    """Deterministic general-QA corpus; about one third unanswerable."""
    rng = random.Random(seed)
    records: list[QaRecord] = []
    serial = 0

    def emit(question: str, context: str, span: tuple[int, int] | None) -> None:
        nonlocal serial
        if span is None:
            records.append(QaRecord(f"gq-{serial:05d}", question, context))
        else:
            start, end = span
            records.append(
                QaRecord(f"gq-{serial:05d}", question, context,
                         answer_text=context[start:end], answer_start=start)
            )
        serial += 1

    while len(records) < n_questions:
        topic = rng.choice(TOPICS)
        n_frames = 1 if rng.random() < 0.6 else 2
        frames = rng.sample(list(topic.frames), min(n_frames, len(topic.frames)))
        used_values: set[str] = set()
        sentences: list[str] = []
        spans: dict[str, tuple[int, int] | None] = {}
        cursor = 0
        for template in frames:
            sentence, local = _render(template, topic.banks, rng, used_values)
            for attr, (s, e) in local.items():
                if attr in spans:
                    spans[attr] = None  # repeated across frames: ambiguous, skip
                else:
                    spans[attr] = (cursor + s, cursor + e)
            sentences.append(sentence)
            cursor += len(sentence) + 2  # ". " joiner
        context = ". ".join(sentences) + "."

        answerable = [(a, sp) for a, sp in spans.items() if sp is not None]
        rng.shuffle(answerable)
        for attr, span in answerable[:3]:
            emit(rng.choice(topic.questions[attr]), context, span)

        n_negative = (1 if rng.random() < 0.8 else 0) + (1 if rng.random() < 0.35 else 0)
        for _ in range(n_negative):
            if rng.random() < 0.7:
                absent = sorted(set(topic.questions) - set(spans))
                if not absent:
                    continue
                attr = rng.choice(absent)
                emit(rng.choice(topic.questions[attr]), context, None)
            else:
                other = rng.choice([t for t in TOPICS if t.name != topic.name])
                attr = rng.choice(sorted(other.questions))
                emit(rng.choice(other.questions[attr]), context, None)

    return records[:n_questions]
