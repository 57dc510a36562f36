"""Seeded synthetic corpora for the bundled demo domains.

Each generator draws utterances from a small template bank whose slots
match the corresponding bundled screen and schema, so the output is
ready for question generation, conversion, and oracle-backed evaluation.
Texts are unique within a corpus, no slot repeats inside an utterance,
and equal seeds reproduce the files shipped under the package data
directory byte for byte.
"""

from __future__ import annotations

import random
from typing import Mapping, Sequence

from .conversion import AnnotatedUtterance, utterance_from_bio

Bank = Mapping[str, Sequence[str]]
Template = Sequence[str]  # tokens; "{slot}" items are value positions

# Slot pairs whose values must differ inside one utterance.
_DISTINCT_PAIRS = (
    ("fromloc.city_name", "toloc.city_name"),
    ("departure_airport", "arrival_airport"),
)


_VEHICLE_LOGGER_BANKS: Bank = {
    "date": ("today", "yesterday", "march 3", "last friday", "june 21", "april 2",
             "jan 5", "dec 12", "monday", "the 3rd"),
    "odometer_value": ("84213", "12450.3", "90210", "33110", "120043", "45872",
                       "60000", "78110"),
    "fuel_cost": ("42.50", "$38", "19 dollars", "55.10", "60 euros", "33.75",
                  "27 dollars", "80.00"),
    "fuel_added": ("12 gallons", "40 liters", "9.5 gallons", "31 liters",
                   "14 gallons", "22 liters", "8 gallons", "50 liters"),
    "trip_description": ("client visit downtown", "airport shuttle run",
                         "weekly grocery trip", "site inspection",
                         "sales call in austin", "delivery to the warehouse",
                         "school pickup", "parts run"),
    "gps_tracking": ("on", "off", "enable", "disable", "turn on", "turn off"),
    "start_logging": ("start", "begin", "stop", "end", "pause", "resume"),
    "entry": ("a new entry", "another entry", "one more entry", "a fresh entry",
              "a second entry", "an extra entry"),
    "trip_type": ("Business", "Personal", "Other"),
    "vehicle": ("the van", "my truck", "the sedan", "car 7", "the company car",
                "my motorcycle", "the pickup", "unit 12"),
}

_VEHICLE_LOGGER_TEMPLATES: tuple[Template, ...] = (
    "log {date} with odometer at {odometer_value} for {vehicle}".split(),
    "mark this as a {trip_type} trip for {trip_description}".split(),
    "i added {fuel_added} costing {fuel_cost} on {date}".split(),
    "set gps tracking to {gps_tracking} and {start_logging} logging".split(),
    "create {entry} for {vehicle} on {date}".split(),
    "odometer reads {odometer_value} after the {trip_description}".split(),
    "please log this trip as {trip_type}".split(),
    "{start_logging} logging on {date} for {vehicle}".split(),
    "fuel stop cost {fuel_cost} with {fuel_added} added".split(),
    "note {trip_description} odometer {odometer_value} cost {fuel_cost}".split(),
)


_UNITED_BANKS: Bank = {
    "departure_airport": ("california", "san jose", "boston", "chicago", "denver",
                          "newark", "san francisco", "austin", "portland", "tucson"),
    "arrival_airport": ("arizona", "boston", "chicago", "denver", "newark",
                        "san francisco", "austin", "portland", "tucson", "san jose"),
    "travel_dates": ("august 15th 2020", "june 3rd", "december 24", "next friday",
                     "april 10 to april 15", "the first week of may",
                     "july 4th weekend", "march 1"),
    "search": ("search", "find flights", "start the search", "look for flights",
               "run the search", "show results"),
    "swap_airports": ("swap", "switch", "reverse", "swap them", "flip them",
                      "switch them"),
    "current_location": ("my current location", "where i am now", "right here",
                         "my location", "my present location", "this city"),
}

_UNITED_TEMPLATES: tuple[Template, ...] = (
    "book a flight from {departure_airport} to {arrival_airport} on {travel_dates}".split(),
    "i am flying from {departure_airport} and flying to {arrival_airport}".split(),
    "please {search} for trips leaving {travel_dates}".split(),
    "{swap_airports} the airports and then {search} again".split(),
    "fly me to {arrival_airport} from {current_location}".split(),
    "use {current_location} as the starting airport".split(),
    "i depart from {departure_airport} on {travel_dates}".split(),
    "change my destination to {arrival_airport} and {swap_airports} if needed".split(),
)


_TRIP_ADVISOR_BANKS: Bank = {
    "number_of_beds": ("1 bed", "2 beds", "two beds", "3 beds", "one bed",
                       "four beds", "a single bed", "twin beds"),
    "date_range": ("march 3 to march 8", "the weekend", "june 1 through june 5",
                   "next month", "friday to sunday", "august 10 to 14",
                   "early september", "the last week of july"),
    "filter_by_price": ("under 100 dollars", "cheap", "less than 80 a night",
                        "mid range", "under 250", "budget friendly",
                        "below 150", "luxury priced"),
    "filter_by_rating": ("5 star", "four star", "top rated", "3 stars or better",
                         "highly rated", "at least 4 stars", "best reviewed",
                         "2 stars minimum"),
    "number_of_nights": ("3 nights", "two nights", "a week", "5 nights",
                         "one night", "four nights", "ten nights", "6 nights"),
    "number_of_people": ("2 people", "four people", "2 adults", "a family of 4",
                         "6 guests", "three travelers", "one person", "5 adults"),
}

_TRIP_ADVISOR_TEMPLATES: tuple[Template, ...] = (
    "please book a {filter_by_rating} hotel for {number_of_people}".split(),
    "find rooms with {number_of_beds} for {number_of_nights}".split(),
    "show hotels {filter_by_price} from {date_range}".split(),
    "we are {number_of_people} staying {number_of_nights}".split(),
    "i want {number_of_beds} and a {filter_by_rating} rating".split(),
    "search {date_range} for deals {filter_by_price}".split(),
    "reserve for {number_of_people} over {date_range}".split(),
    "need a room for {number_of_nights} with {number_of_beds}".split(),
)


_ATIS_CITIES = ("denver", "pittsburgh", "boston", "atlanta", "dallas", "oakland",
                "baltimore", "philadelphia", "charlotte", "milwaukee", "memphis",
                "indianapolis", "seattle", "phoenix", "nashville", "columbus",
                "detroit", "houston", "orlando", "tampa")

_ATIS_BANKS: Bank = {
    "fromloc.city_name": _ATIS_CITIES,
    "toloc.city_name": _ATIS_CITIES,
    "toloc.state_name": ("colorado", "texas", "california", "georgia", "ohio",
                         "florida", "tennessee", "arizona"),
    "airline_name": ("american airlines", "united airlines", "delta",
                     "continental", "us air", "northwest", "twa", "lufthansa"),
    "depart_date.day_name": ("monday", "tuesday", "wednesday", "thursday",
                             "friday", "saturday", "sunday"),
    "depart_date.month_name": ("january", "february", "march", "april", "may",
                               "june", "july", "august"),
    "depart_date.day_number": ("first", "second", "third", "fifth", "seventh",
                               "tenth", "twelfth", "fifteenth", "twentieth",
                               "twenty second"),
    "depart_time.period_of_day": ("morning", "afternoon", "evening", "night"),
    "arrive_time.time": ("5 pm", "noon", "10 am", "8:30 pm", "6:45 am", "midnight"),
    "class_type": ("first class", "coach", "business class", "economy"),
    "cost_relative": ("cheapest", "lowest", "least expensive", "most expensive"),
    "round_trip": ("round trip", "one way"),
    "flight_number": ("201", "343", "1039", "417", "98", "771", "555", "1222"),
    "meal_description": ("breakfast", "lunch", "dinner", "snack"),
    "airport_name": ("logan airport", "general mitchell", "love field",
                     "sky harbor", "lambert field", "lindbergh field"),
    "transport_type": ("rental car", "taxi", "limousine", "bus"),
}

_ATIS_TEMPLATES: tuple[Template, ...] = (
    "i live in {fromloc.city_name} and i'd like to make a trip to {toloc.city_name}".split(),
    "show me {round_trip} flights from {fromloc.city_name} to {toloc.city_name} on {depart_date.day_name}".split(),
    "i want the {cost_relative} fare from {fromloc.city_name} to {toloc.city_name}".split(),
    "list {airline_name} flights leaving {fromloc.city_name} in the {depart_time.period_of_day}".split(),
    "book a {class_type} seat on flight {flight_number}".split(),
    "what flights arrive in {toloc.city_name} before {arrive_time.time}".split(),
    "i need a flight on {depart_date.month_name} {depart_date.day_number} to {toloc.city_name}".split(),
    "does flight {flight_number} serve {meal_description}".split(),
    "how do i get from {airport_name} to downtown by {transport_type}".split(),
    "find {airline_name} service to {toloc.city_name} {toloc.state_name} on {depart_date.day_name}".split(),
)


def _render(
    template: Template,
    banks: Bank,
    rng: random.Random,
) -> tuple[list[str], list[str]]:
    slots = [item[1:-1] for item in template if item.startswith("{")]
    values: dict[str, str] = {}
    for slot in slots:
        value = rng.choice(banks[slot])
        for a, b in _DISTINCT_PAIRS:
            partner = b if slot == a else a if slot == b else None
            if partner in values:
                while value == values[partner]:
                    value = rng.choice(banks[slot])
        values[slot] = value
    tokens: list[str] = []
    tags: list[str] = []
    for item in template:
        if item.startswith("{"):
            slot = item[1:-1]
            words = values[slot].split()
            tokens.extend(words)
            tags.extend([f"B-{slot}"] + [f"I-{slot}"] * (len(words) - 1))
        else:
            tokens.append(item)
            tags.append("O")
    return tokens, tags


def _generate(
    templates: Sequence[Template],
    banks: Bank,
    n: int,
    seed: int,
    prefix: str,
) -> list[AnnotatedUtterance]:
    rng = random.Random(seed)
    seen: set[str] = set()
    out: list[AnnotatedUtterance] = []
    attempts = 0
    limit = max(200 * n, 2000)
    while len(out) < n:
        attempts += 1
        if attempts > limit:
            raise RuntimeError(
                f"could not draw {n} unique utterances for {prefix!r} "
                f"within {limit} attempts; enlarge the banks"
            )
        tokens, tags = _render(rng.choice(templates), banks, rng)
        text = " ".join(tokens)
        if text in seen:
            continue
        seen.add(text)
        out.append(utterance_from_bio(f"{prefix}-{len(out):04d}", tokens, tags))
    return out


def generate_vehicle_logger(n: int = 120, seed: int = 7) -> list[AnnotatedUtterance]:
    return _generate(_VEHICLE_LOGGER_TEMPLATES, _VEHICLE_LOGGER_BANKS, n, seed, "vl")


def generate_united(n: int = 120, seed: int = 7) -> list[AnnotatedUtterance]:
    return _generate(_UNITED_TEMPLATES, _UNITED_BANKS, n, seed, "un")


def generate_trip_advisor(n: int = 120, seed: int = 7) -> list[AnnotatedUtterance]:
    return _generate(_TRIP_ADVISOR_TEMPLATES, _TRIP_ADVISOR_BANKS, n, seed, "ta")


def generate_atis(n: int = 160, seed: int = 7) -> list[AnnotatedUtterance]:
    return _generate(_ATIS_TEMPLATES, _ATIS_BANKS, n, seed, "at")


DOMAIN_GENERATORS = {
    "vehicle_logger": generate_vehicle_logger,
    "united": generate_united,
    "trip_advisor": generate_trip_advisor,
    "atis_visual": generate_atis,
}


def generate_corpus(domain: str, n: int, seed: int) -> list[AnnotatedUtterance]:
    try:
        generator = DOMAIN_GENERATORS[domain]
    except KeyError:
        raise ValueError(
            f"unknown domain {domain!r}; expected one of {sorted(DOMAIN_GENERATORS)}"
        ) from None
    return generator(n=n, seed=seed)
