"""Independent audit of the fixture: enumerates every member pair of every
deal with itertools and counts them per layer, before and after merging."""
import csv
import itertools
import pathlib
import sys

here = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent)
layers = {"political": ("political",), "economic": ("economic",), "both": ("political", "economic")}
pairs = {"political": 0, "economic": 0}
edges = {"political": set(), "economic": set()}

with open(here / "countries.csv", newline="") as f:
    countries = [row["iso3"] for row in csv.DictReader(f)]

with open(here / "treaties.csv", newline="") as f:
    for row in csv.DictReader(f):
        members = sorted(set(row["members"].split(";")))
        for layer in layers[row["layer"]]:
            for a, b in itertools.combinations(members, 2):
                pairs[layer] += 1
                edges[layer].add((a, b))

bil = here / "bilaterals.csv"
if bil.exists():
    with open(bil, newline="") as f:
        for row in csv.DictReader(f):
            a, b = sorted((row["iso3_a"], row["iso3_b"]))
            for layer in layers[row["layer"]]:
                pairs[layer] += 1
                edges[layer].add((a, b))

print(f"countries={len(countries)}")
print(f"political_pairs={pairs['political']}")
print(f"economic_pairs={pairs['economic']}")
print(f"political_edges={len(edges['political'])}")
print(f"economic_edges={len(edges['economic'])}")
print(f"political_only={len(edges['political'] - edges['economic'])}")
