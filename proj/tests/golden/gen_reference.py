#!/usr/bin/env python3
"""Reference implementation of the instance generator.

Regenerates gen_2x3_seed42.jsonl from the documented draw recipe, without
touching the C++ code. The instance test compares the library's generator
against this file, which is what pins the recipe across implementations:

  rng = SplitMix64(seed)
  c_u = capacity_low + rng.next() % (capacity_high - capacity_low + 1)
  for each arrival v (outer), each offline u (inner):
      coin = rng.next_double()
      w = weight_low + (weight_high - weight_low) * rng.next_double()
      weight = 0 if coin < sparsity else w

The weight draw is consumed even when the coin zeroes the edge.
"""

import json
import sys

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def next_double(self):
        return (self.next() >> 11) * 2.0**-53


def generate(num_offline, num_online, seed, capacity_low=1, capacity_high=1,
             weight_low=0.0, weight_high=1.0, sparsity=0.0):
    rng = SplitMix64(seed)
    span = capacity_high - capacity_low + 1
    capacities = [capacity_low + rng.next() % span for _ in range(num_offline)]
    arrivals = []
    for _ in range(num_online):
        row = []
        for _ in range(num_offline):
            coin = rng.next_double()
            w = weight_low + (weight_high - weight_low) * rng.next_double()
            row.append(0.0 if coin < sparsity else w)
        arrivals.append(row)
    return {
        "num_offline": num_offline,
        "capacities": capacities,
        "w_max": [weight_high] * num_offline,
        "arrivals": arrivals,
    }


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "gen_2x3_seed42.jsonl"
    with open(out, "w") as f:
        f.write(json.dumps(generate(num_offline=2, num_online=3, seed=42)) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
