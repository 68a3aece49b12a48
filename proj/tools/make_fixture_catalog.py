#!/usr/bin/env python3
"""Writes the fictional title catalog and pricing fixture used by tests and examples.

Output is deterministic. Titles are built from a neutral vocabulary so that no title
contains words the rule classifier reacts to, and no title is a contiguous run of
another title's words.
"""
import argparse
import json
import random
import re
from pathlib import Path

WORDS = """
amber anchor arbor ash aster aurora autumn azure badger basalt beacon birch bramble breaker
brook cairn canyon cedar cinder citadel clover cobalt comet copper coral cormorant crescent
crimson cypress dawn delta drift dusk ember falcon fathom fern fjord flint fox gale garnet
glacier granite gull harbor harvest hawk heather heron hollow indigo iris ivory jasper juniper
kestrel lagoon lantern larch lark ledger lichen linden lotus lumen lynx magnolia mantle maple
marble marsh meadow meridian mesa midnight mist moor moss nectar nettle north oak obsidian
ochre onyx orchard osprey otter paper pebble pelican pine plover quarry quartz quill raven reed
ridge river robin rowan saffron sage salt sapphire satin sequoia shale shingle sierra silent
silver slate solstice sorrel sparrow spruce starling stone summit swallow tamarind tarn thistle
thorn tide timber topaz tundra umber valley velvet verdant vesper violet walnut warden willow
winter wren yarrow zephyr
""".split()

COMPANIES = [
    "Northwind Pictures", "Bluefin Studios", "Copperleaf Media", "Halcyon Works",
    "Gray Heron Entertainment", "Saltmarsh Productions", "Ironbark Television", "Lumen Street",
]
COUNTRIES = ["US", "GB", "IN", "KR", "TR", "ES", "FR", "JP"]

SERVICES = [
    ("Streamly", 7.99, "USD"),
    ("Cinevault", 6.99, "EUR"),
    ("Reelbox", 9.99, "USD"),
    ("Kinora", 199.0, "INR"),
    ("Dizimax", 149.99, "TRY"),
]

FIXED = [
    {"id": "office-uk", "title": "The Office", "year": 2001, "kind": "tv",
     "companies": ["BBC"], "countries": ["GB"]},
    {"id": "office-us", "title": "The Office", "year": 2005, "kind": "tv",
     "companies": ["NBC Universal"], "countries": ["US"]},
    {"id": "love", "title": "Love", "year": 2016, "kind": "tv",
     "companies": ["Saltmarsh Productions"], "countries": ["US"]},
    {"id": "love-actually", "title": "Love Actually", "year": 2003, "kind": "movie",
     "companies": ["Copperleaf Media"], "countries": ["GB"]},
    {"id": "old-1975", "title": "Granite Tide Rising", "year": 1975, "kind": "movie",
     "companies": ["Halcyon Works"], "countries": ["US"]},
]


def contiguous_in(short, long):
    n = len(short)
    return any(long[i:i + n] == short for i in range(len(long) - n + 1))


def tokens(title):
    return re.findall(r"[a-z0-9]+", title.lower())


def make_titles(rng, count):
    taken = [tokens(e["title"]) for e in FIXED]
    titles = []
    while len(titles) < count:
        n = rng.choice([2, 2, 3])
        words = rng.sample(WORDS, n)
        if rng.random() < 0.25:
            words = ["the"] + words
        toks = words
        if any(contiguous_in(toks, t) or contiguous_in(t, toks) for t in taken):
            continue
        taken.append(toks)
        titles.append(" ".join(w.capitalize() if w != "the" else "The" for w in words))
    return titles


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out_dir)

    entries = list(FIXED)
    for i, title in enumerate(make_titles(rng, args.count - len(FIXED))):
        entry = {
            "id": f"t{i + 1:04d}",
            "title": title,
            "year": rng.randint(1982, 2025),
            "kind": "tv" if rng.random() < 0.35 else "movie",
            "companies": rng.sample(COMPANIES, rng.choice([1, 1, 2])),
            "countries": rng.sample(COUNTRIES, rng.choice([1, 1, 1, 2])),
        }
        entries.append(entry)

    with open(out / "catalog.jsonl", "w") as f:
        for e in entries:
            f.write(json.dumps(e) + "\n")

    with open(out / "pricing.jsonl", "w") as f:
        for e in entries:
            roll = rng.random()
            row = {"title_id": e["id"], "region": "*"}
            if roll < 0.6:
                offers = rng.sample(SERVICES[:3], rng.choice([1, 2]))
                row["streaming"] = [{"service": s, "monthly_cost": c, "currency": cur} for s, c, cur in offers]
            elif roll < 0.85:
                row["rental"] = {"cost": rng.choice([2.99, 3.99, 4.99, 5.99]), "currency": "USD"}
            else:
                row["physical"] = [{"cost": rng.choice([9.99, 14.99, 19.99]), "currency": rng.choice(["USD", "EUR"])}
                                   for _ in range(rng.choice([1, 2]))]
            f.write(json.dumps(row) + "\n")
            if "streaming" in row and rng.random() < 0.5:
                for region, svc in (("IN", SERVICES[3]), ("TR", SERVICES[4])):
                    regional = {"title_id": e["id"], "region": region,
                                "streaming": [{"service": svc[0], "monthly_cost": svc[1], "currency": svc[2]}]}
                    f.write(json.dumps(regional) + "\n")


if __name__ == "__main__":
    main()
