"""Regenerate the bundled scenario files under src/shepherd_de/scenarios/.

The cluttered layouts are drawn once from LAYOUT_SEED and then frozen as
explicit coordinates; rerunning this script reproduces them exactly.
"""
import json
from pathlib import Path

from shepherd_de.harness import ScenarioConfig, generate_obstacles, scenario_to_json

LAYOUT_SEED = 7
OUT = Path(__file__).resolve().parents[1] / "src" / "shepherd_de" / "scenarios"


def write(config: ScenarioConfig) -> None:
    path = OUT / f"{config.name}.json"
    path.write_text(json.dumps(scenario_to_json(config), indent=2) + "\n")
    print("wrote", path)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    # open field: flock in the middle, shepherd at the field centre behind it
    for n in (10, 50, 100):
        write(ScenarioConfig(f"tab1_n{n}", 500.0, (0.0, 0.0), (250.0, 250.0), n,
                             ((150.0, 250.0), (150.0, 250.0)), algorithm="unswdst", n_runs=10))

    layouts = {
        "6small": generate_obstacles(6, 5.0, LAYOUT_SEED),
        "6large": generate_obstacles(6, 10.0, LAYOUT_SEED),
        "13large": generate_obstacles(13, 10.0, LAYOUT_SEED),
    }
    sizes = {"6small": (20, 40, 80), "6large": (20, 40, 80), "13large": (20, 40, 60, 80)}
    for key, obstacles in layouts.items():
        for n in sizes[key]:
            write(ScenarioConfig(f"tab2_{key}_n{n}", 200.0, (0.0, 0.0), (0.0, 0.0), n,
                                 ((60.0, 100.0), (60.0, 100.0)), tuple(obstacles),
                                 algorithm="unswdst1", n_runs=20))


if __name__ == "__main__":
    main()
