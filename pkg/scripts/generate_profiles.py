import os
import sys
from pathlib import Path

import pandas as pd

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from aggregation import ra_aggregate
from config import DATAGEN_CONFIG
from datagen import MallowsConfig, sample_mallows, save_profile
from rankings import Ranking, average_kendall, kendall_normalized, tally


class ProfileGenerator:
    def __init__(self, seed=DATAGEN_CONFIG["default_seed"]):
        self.seed = seed
        self.grid = [
            (4, 1.0), (4, 0.25),
            (15, 0.25), (15, 1.0),
        ]

    def generate(self, m, theta, n):
        """Sample one profile; the seed depends on the grid cell so files are independent"""
        cfg = MallowsConfig(m=m, n=n, theta=theta, seed=self.seed + 1000 * m + n)
        return sample_mallows(cfg)

    def describe(self, profile):
        """Summary statistics of a profile"""
        m = profile[0].m
        consensus = ra_aggregate(tally(profile))
        return {
            "m": m,
            "n": len(profile),
            "distance_to_reference": sum(kendall_normalized(r, Ranking.identity(m)) for r in profile) / len(profile),
            "consensus_distance": average_kendall(consensus, profile),
            "consensus_is_reference": consensus == Ranking.identity(m),
        }

    def save_profiles(self, output_dir="data/profiles"):
        """Generate and save every grid profile"""
        output_path = Path(output_dir)
        output_path.mkdir(parents=True, exist_ok=True)

        print("🎲 Generating Mallows ranking profiles...")
        rows = []
        for m, theta in self.grid:
            for n in DATAGEN_CONFIG["agent_counts"]:
                profile = self.generate(m, theta, n)
                path = output_path / f"mallows_m{m}_theta{theta:g}_n{n}.csv"
                save_profile(profile, path)
                print(f"✅ Generated {n} rankings over {m} alternatives (theta={theta:g})")
                rows.append({"file": path.name, "theta": theta, **self.describe(profile)})

        summary = pd.DataFrame(rows)
        summary.to_csv(output_path / "summary.csv", index=False)
        print(f"\n📊 All profiles saved to {output_path}")
        return summary


def main():
    """Main function to generate the Mallows profiles"""
    generator = ProfileGenerator()
    summary = generator.save_profiles()

    print("\n📈 Profile Summary:")
    print(summary[["file", "distance_to_reference", "consensus_distance", "consensus_is_reference"]].to_string(index=False))


if __name__ == "__main__":
    main()
