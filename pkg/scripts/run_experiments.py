"""Run experiment configs and print a short summary of each.

    python scripts/run_experiments.py                      # every config in scripts/configs
    python scripts/run_experiments.py scripts/configs/convergence_poisson.json --threads 2
"""
import argparse
import time
from pathlib import Path

from ppwass.experiments import ExperimentConfig, fit_rate, run

CONFIG_DIR = Path(__file__).parent / "configs"


def summarise(cfg, result):
    if cfg.experiment == "convergence":
        for row in result["aggregate"]:
            print(f"  n={row['n']:6d}  mean W={row['mean_w']:.5f} +- {row['stderr']:.5f}")
        for abscissa in ("sqrt_log_n", "sqrt_logn_loglogn"):
            slope, _, r2 = fit_rate(result["aggregate"], abscissa)
            print(f"  fit vs {abscissa}: slope {slope:.3f}, r^2 {r2:.3f}")
    elif cfg.experiment == "concentration":
        for row in result["table"]:
            print(f"  eps={row['eps']:<5}  freq={row['empirical_freq']:.3f}  bound={row['bound']:.3f}")
    elif cfg.experiment == "campbell":
        print(f"  estimate {result['estimate']:.4f} +- {result['stderr']:.4f} (reference {result['reference']})")
    else:
        print(f"  {len(result)} bound evaluations written")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("configs", nargs="*", type=Path)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out-root", type=Path, default=None)
    args = parser.parse_args()
    for path in args.configs or sorted(CONFIG_DIR.glob("*.json")):
        cfg = ExperimentConfig.from_json(path).replace(threads=args.threads)
        out = args.out_root / path.stem if args.out_root else None
        start = time.perf_counter()
        result = run(cfg, out)
        print(f"{path.name} ({time.perf_counter() - start:.1f} s)")
        summarise(cfg, result)


if __name__ == "__main__":
    main()
