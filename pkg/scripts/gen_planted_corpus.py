#!/usr/bin/env python3
"""Regenerate the planted fixture corpus used by the recovery tests.

Three domains with disjoint subject vocabularies; inside each domain two
groups of four tables share identical attribute columns, so the group's
pairwise attribute distance is exactly 0 while cross-group tables share
only the subject attribute (Jaccard distance 6/7). Two tables per group
are annotated at the subtype level and two at the domain level, which
makes the domain the majority annotation of each top-level cluster.
Output is deterministic; the files are checked in.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "planted"

# domain -> (subject header, subject values, {group: (subtype, attr columns)})
DOMAINS = {
    "veh": {
        "domain": "Vehicles",
        "subject": ("model_name", ["Falcon GT", "Road Runner", "Blue Comet",
                                   "Silver Arrow", "Night Hawk", "Sand Fox"]),
        "groups": {
            "car": (
                "Cars",
                [
                    ("top_speed", ["240", "180", "240", "210", "180", "210"]),
                    ("doors", ["2", "4", "4", "2", "4", "4"]),
                    ("fuel", ["petrol", "diesel", "petrol", "hybrid", "diesel", "petrol"]),
                ],
            ),
            "truck": (
                "Trucks",
                [
                    ("payload_tons", ["12.5", "8.0", "12.5", "20.0", "8.0", "20.0"]),
                    ("axles", ["3", "2", "3", "4", "2", "3"]),
                    ("cab_type", ["sleeper", "day", "sleeper", "crew", "day", "crew"]),
                ],
            ),
        },
    },
    "wld": {
        "domain": "Wildlife",
        "subject": ("species", ["Grey Heron", "Sand Martin", "Mirror Carp",
                                "Brook Trout", "Barn Owl", "Reef Shark"]),
        "groups": {
            "bird": (
                "Birds",
                [
                    ("wingspan_cm", ["95", "110", "95", "180", "110", "180"]),
                    ("migratory", ["yes", "no", "yes", "yes", "no", "no"]),
                    ("clutch_size", ["3", "5", "3", "4", "5", "4"]),
                ],
            ),
            "fish": (
                "Fishes",
                [
                    ("max_depth_m", ["40", "12", "40", "200", "12", "200"]),
                    ("water", ["fresh", "salt", "fresh", "fresh", "salt", "salt"]),
                    ("fin_count", ["7", "6", "7", "8", "6", "7"]),
                ],
            ),
        },
    },
    "uni": {
        "domain": "Universities",
        "subject": ("institution", ["North Ridge", "Lake View", "Saint Bede",
                                    "Iron Gate", "Maple Hall", "Crown Point"]),
        "groups": {
            "col": (
                "Colleges",
                [
                    ("undergrads", ["5200", "810", "5200", "2300", "810", "2300"]),
                    ("campus_type", ["urban", "rural", "urban", "coastal", "rural", "coastal"]),
                    ("founded", ["1892-09-01", "1901-05-15", "1892-09-01",
                                 "1920-01-30", "1901-05-15", "1920-01-30"]),
                ],
            ),
            "inst": (
                "Institutes",
                [
                    ("labs", ["14", "6", "14", "22", "6", "14"]),
                    ("focus_area", ["optics", "genomics", "optics", "robotics",
                                    "genomics", "robotics"]),
                    ("grant_musd", ["3.5", "1.2", "3.5", "8.9", "1.2", "8.9"]),
                ],
            ),
        },
    },
}


def table_rows(subject, attrs):
    header, values = subject
    headers = [header] + [name for name, _ in attrs]
    columns = [values] + [vals for _, vals in attrs]
    rows = [[col[i] for col in columns] for i in range(len(values))]
    return [headers] + rows


def main() -> None:
    tables_dir = FIXTURE_DIR / "tables"
    gt_dir = FIXTURE_DIR / "gt"
    tables_dir.mkdir(parents=True, exist_ok=True)
    gt_dir.mkdir(parents=True, exist_ok=True)

    annotations = []
    gt_types: dict[str, set[str]] = {}
    gt_edges = []
    for prefix, domain_cfg in DOMAINS.items():
        domain = domain_cfg["domain"]
        gt_types.setdefault(domain, set())
        for group_key, (subtype, attrs) in domain_cfg["groups"].items():
            gt_types.setdefault(subtype, set())
            gt_edges.append([domain, subtype])
            rows = table_rows(domain_cfg["subject"], attrs)
            # two subtype-annotated tables and two domain-annotated tables
            members = [
                (f"{prefix}_{group_key}_1", subtype),
                (f"{prefix}_{group_key}_2", subtype),
                (f"{prefix}_mix_{group_key}_1", domain),
                (f"{prefix}_mix_{group_key}_2", domain),
            ]
            for table_id, annot in members:
                with (tables_dir / f"{table_id}.csv").open("w", newline="", encoding="utf-8") as fh:
                    csv.writer(fh).writerows(rows)
                path = domain if annot == domain else f"{domain}>{annot}"
                annotations.append((table_id, domain, path))
                gt_types[annot].add(table_id)

    gt_taxonomy = {
        "types": [
            {"id": name, "name": name, "tables": sorted(tables), "synthetic": False}
            for name, tables in sorted(gt_types.items())
        ],
        "edges": sorted(gt_edges),
    }
    (gt_dir / "gt_taxonomy.json").write_text(
        json.dumps(gt_taxonomy, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    with (gt_dir / "gt_annotations.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table_id", "top_level", "path"])
        for row in sorted(annotations):
            writer.writerow(row)
    print(f"wrote {len(annotations)} tables under {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
