#!/usr/bin/env python3
"""Regenerate the scripted fixture for the generative pipeline tests.

Ten tables, eight types over three layers. Each table carries one
distinctive cell value that the script keys on, so generation responses
are stable regardless of row sampling order. The layering script places
the eight types over three iterations and the ground truth mirrors the
scripted hierarchy, with table annotations chosen so every type matches
itself. Output is deterministic; the files are checked in.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "gett"

# table id -> (marker cell, generated type, GT path)
TABLES = {
    "animal_1": ("Banded Quoll", "Animal", "Animal"),
    "animal_2": ("Spotted Tapir", "Animal", "Animal"),
    "bird_1": ("Masked Booby", "Bird", "Animal>Bird"),
    "cat_1": ("Maine Coon", "Cat", "Animal>Cat"),
    "duck_1": ("Mallard Drake", "Duck", "Animal>Bird>Duck"),
    "eagle_1": ("Harpy Eagle", "Eagle", "Animal>Bird>Eagle"),
    "facility_1": ("Grand Depot", "Facility", "Facility"),
    "facility_2": ("Union Works", "Facility", "Facility"),
    "hospital_1": ("Mercy General", "Hospital", "Facility>Hospital"),
    "school_1": ("Oakwood Primary", "School", "Facility>School"),
}

ROWS = {
    "animal_1": (["animal", "habitat", "body_mass_kg"],
                 [["Banded Quoll", "woodland", "1.3"],
                  ["River Otter", "wetland", "9.0"],
                  ["Red Panda", "forest", "5.4"]]),
    "animal_2": (["animal", "diet", "lifespan_years"],
                 [["Spotted Tapir", "herbivore", "25"],
                  ["Honey Badger", "omnivore", "24"],
                  ["Grey Wolf", "carnivore", "16"]]),
    "bird_1": (["bird", "wingspan_cm", "region"],
               [["Masked Booby", "160", "tropical seas"],
                ["Little Stint", "35", "arctic coast"],
                ["Great Skua", "140", "north atlantic"]]),
    "cat_1": (["breed", "coat", "weight_kg"],
              [["Maine Coon", "long", "8.2"],
               ["Siamese", "short", "4.5"],
               ["Sphynx", "hairless", "4.0"]]),
    "duck_1": (["duck", "plumage", "pond"],
               [["Mallard Drake", "green head", "mill pond"],
                ["Teal Hen", "mottled brown", "reed lake"],
                ["Pintail", "grey", "salt marsh"]]),
    "eagle_1": (["eagle", "prey", "range_km"],
                [["Harpy Eagle", "sloths", "40"],
                 ["Golden Eagle", "hares", "160"],
                 ["Bald Eagle", "fish", "120"]]),
    "facility_1": (["site", "city", "floor_area"],
                   [["Grand Depot", "Leeds", "12000"],
                    ["West Yard", "Hull", "8000"],
                    ["East Dock", "Hull", "9500"]]),
    "facility_2": (["site", "opened", "capacity"],
                   [["Union Works", "1978-03-01", "430"],
                    ["North Plant", "1990-11-20", "610"],
                    ["South Mill", "1965-07-04", "275"]]),
    "hospital_1": (["hospital", "beds", "district"],
                   [["Mercy General", "420", "riverside"],
                    ["Saint Anne", "180", "old town"],
                    ["Hillcrest", "260", "north gate"]]),
    "school_1": (["school", "pupils", "head_teacher"],
                 [["Oakwood Primary", "310", "R. Ames"],
                  ["Elm Lane", "240", "J. Price"],
                  ["Ferry Road", "405", "T. Okafor"]]),
}

LAYER_SCRIPT = [
    ('child types of "Thing"', "Thing -> Animal\nThing -> Facility"),
    ('child types of "Animal"', "Animal -> Bird\nAnimal -> Cat"),
    ('child types of "Facility"', "Facility -> Hospital\nFacility -> School"),
    ('child types of "Bird"', "Bird -> Duck\nBird -> Eagle"),
    ('child types of "Cat"', "NONE"),
    ('child types of "Hospital"', "NONE"),
    ('child types of "School"', "NONE"),
]

DEMONSTRATION = "Food -> Fruit\nFood -> Vegetable\nFruit -> Apple"

GT_EDGES = [
    ["Animal", "Bird"],
    ["Animal", "Cat"],
    ["Bird", "Duck"],
    ["Bird", "Eagle"],
    ["Facility", "Hospital"],
    ["Facility", "School"],
]


def main() -> None:
    tables_dir = FIXTURE_DIR / "tables"
    gt_dir = FIXTURE_DIR / "gt"
    tables_dir.mkdir(parents=True, exist_ok=True)
    gt_dir.mkdir(parents=True, exist_ok=True)

    for table_id, (headers, rows) in ROWS.items():
        with (tables_dir / f"{table_id}.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(headers)
            writer.writerows(rows)

    script = [
        {"match": marker, "response": type_name}
        for marker, type_name, _ in TABLES.values()
    ]
    script += [{"match": m, "response": r} for m, r in LAYER_SCRIPT]
    script.append({"match": "example of a taxonomy", "response": DEMONSTRATION})
    (FIXTURE_DIR / "script.json").write_text(
        json.dumps(script, indent=2) + "\n", encoding="utf-8"
    )

    gt_types: dict[str, set[str]] = {}
    annotations = []
    for table_id, (_, _, path) in TABLES.items():
        parts = path.split(">")
        annotations.append((table_id, parts[0], path))
        for name in parts:
            gt_types.setdefault(name, set())
        gt_types[parts[-1]].add(table_id)
    gt_taxonomy = {
        "types": [
            {"id": name, "name": name, "tables": sorted(tables), "synthetic": False}
            for name, tables in sorted(gt_types.items())
        ],
        "edges": sorted(GT_EDGES),
    }
    (gt_dir / "gt_taxonomy.json").write_text(
        json.dumps(gt_taxonomy, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    with (gt_dir / "gt_annotations.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table_id", "top_level", "path"])
        for row in sorted(annotations):
            writer.writerow(row)
    print(f"wrote fixture under {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
