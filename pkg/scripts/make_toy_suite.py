# pylint: disable=line-too-long, function-name-too-long
"""
Write the toy robustness suite: a trained 16 -> 8 -> 8 -> 3 classifier and 50 held-out points.

    python scripts/make_toy_suite.py --out-dir data/toy --seed 0
    bpmip suite --network data/toy/network.json --data data/toy/points.json --epsilon 0.02
"""

import argparse
import logging
import os

from bpmip.network.io import dump_network
from bpmip.recorder import write_json_atomic
from bpmip.utils import toy_suite


def main():
    parser = argparse.ArgumentParser(description="Generate the toy classifier and its labelled points")
    parser.add_argument("--out-dir", default="data/toy")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--points", type=int, default=50)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    net, dataset = toy_suite(seed=args.seed, n_points=args.points)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "network.json"), "w", encoding="utf-8") as f:
        f.write(dump_network(net))
    write_json_atomic(os.path.join(args.out_dir, "points.json"), dataset)
    print(f"wrote {args.out_dir}/network.json and {args.out_dir}/points.json")


if __name__ == "__main__":
    main()
