#!/usr/bin/env python3
"""Regenerates the shipped fixture files under fixtures/."""
import argparse
import json
from pathlib import Path

HEADINGS = {"S": (1, 0), "N": (-1, 0), "E": (0, 1), "W": (0, -1)}
RIGHT = {"S": "W", "W": "N", "N": "E", "E": "S"}
LEFT = {v: k for k, v in RIGHT.items()}


def grid(name, rows, cols, peak, recovery, internal_time=15.0, entry_time=10.0):
    nodes, links = [], []
    inter = {(r, c): f"I{r}{c}" for r in range(rows) for c in range(cols)}
    for r in range(rows):
        for c in range(cols):
            nodes.append({"id": inter[(r, c)], "kind": "intersection"})

    def neighbour(r, c, heading):
        dr, dc = HEADINGS[heading]
        rr, cc = r + dr, c + dc
        if (rr, cc) in inter:
            return inter[(rr, cc)]
        # boundary nodes are named by the side they sit on
        if rr < 0:
            return f"N{cc}"
        if rr >= rows:
            return f"S{cc}"
        if cc < 0:
            return f"W{rr}"
        return f"E{rr}"

    boundary = [f"N{c}" for c in range(cols)] + [f"S{c}" for c in range(cols)]
    boundary += [f"W{r}" for r in range(rows)] + [f"E{r}" for r in range(rows)]
    nodes += [{"id": b, "kind": "boundary"} for b in boundary]

    # outgoing[(node, heading)] = link id leaving that intersection in that heading
    outgoing = {}
    for (r, c), node in inter.items():
        for h in HEADINGS:
            to = neighbour(r, c, h)
            outgoing[(node, h)] = f"{node}-{to}"

    entries, internals, exits = [], [], []
    for (r, c), node in inter.items():
        for h in HEADINGS:
            to = neighbour(r, c, h)
            link = {"id": f"{node}-{to}", "from": node, "to": to}
            if to.startswith("I"):
                link["free_flow_time"] = internal_time
                internals.append((link, h))
            else:
                link["free_flow_time"] = entry_time
                link["lanes"] = [{}, {}]
                exits.append(link)
                # the matching entry link, travelling opposite to h
                back = {"S": "N", "N": "S", "E": "W", "W": "E"}[h]
                entries.append(({"id": f"{to}-{node}", "from": to, "to": node, "free_flow_time": entry_time}, back))

    def with_lanes(link, heading):
        node = link["to"]
        through = outgoing[(node, heading)]
        right = outgoing[(node, RIGHT[heading])]
        left = outgoing[(node, LEFT[heading])]
        link["lanes"] = [{"movements": [through, right]}, {"movements": [left]}]
        return link

    links = [with_lanes(l, h) for l, h in entries] + [with_lanes(l, h) for l, h in internals] + exits

    intersections = []
    for node in inter.values():
        by_heading = {}
        for l in links:
            if l["to"] == node:
                for h in HEADINGS:
                    if outgoing[(node, h)] == l["lanes"][0]["movements"][0]:
                        by_heading[h] = l["id"]
        ns = [by_heading["S"], by_heading["N"]]
        ew = [by_heading["E"], by_heading["W"]]
        intersections.append({
            "node": node,
            "phases": [
                [f"{l}:0" for l in ns],
                [f"{l}:1" for l in ns],
                [f"{l}:0" for l in ew],
                [f"{l}:1" for l in ew],
            ],
        })

    flows = []
    for o in boundary:
        dests = [d for d in boundary if d != o]
        for d in dests:
            flows.append({"origin": o, "destination": d,
                          "rates": [round(peak / len(dests), 12), round(recovery / len(dests), 12)]})

    return {
        "kind": "road_network",
        "name": name,
        "saturation_headway": 2.0,
        "yellow_time": 4,
        "nodes": nodes,
        "links": links,
        "intersections": intersections,
        "priority_lanes": [],
        "demand": {"segment_starts": [0, 1800], "flows": flows},
        "reward_weights": {"a1": 1.0, "b1": 1.0, "a2": 0.5, "b2": 0.5},
    }


def matrix_coop():
    table = [[0, 2, 0], [0, 2, 1], [2, 5, 3]]
    return {
        "kind": "matrix_game",
        "name": "matrix-coop",
        "agents": 2,
        "actions": 3,
        "payoff": [[float(v), float(v)] for row in table for v in row],
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    ap.add_argument("--peak", type=float, default=0.15, help="veh/s per origin, first half hour")
    ap.add_argument("--recovery", type=float, default=0.05, help="veh/s per origin, second half hour")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "line-2.json": grid("line-2", 1, 2, args.peak, args.recovery),
        "grid-2x2.json": grid("grid-2x2", 2, 2, args.peak, args.recovery),
        "grid-3x3.json": grid("grid-3x3", 3, 3, args.peak, args.recovery),
        "matrix-coop.json": matrix_coop(),
    }
    for name, doc in files.items():
        (out / name).write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
