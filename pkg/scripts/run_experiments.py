#!/usr/bin/env python3
"""Run the bundled sweeps and drop CSVs (and convergence traces) in results/.

    python3 scripts/run_experiments.py            # everything
    python3 scripts/run_experiments.py users      # one experiment
"""
import argparse
import pathlib
import sys

from oamris.harness import main as simulate

ROOT = pathlib.Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

EXPERIMENTS = {
    "schemes": ["--config", str(CONFIGS / "scheme_comparison.cfg")],
    "ris-size": ["--config", str(CONFIGS / "ris_size.cfg")],
    "users": ["--config", str(CONFIGS / "users.cfg")],
    "antennas": ["--sweep", "n_tx", "--values", "8,12,16,20", "--schemes",
                 "proposed,uca-mimo-mrt,uca-mimo-zf,uca-mimo-mmse", "--trials", "20"],
    "convergence": ["--sweep", "p_t_db", "--values", "0,10,20", "--schemes", "proposed",
                    "--trials", "5"],
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", choices=[[], *EXPERIMENTS], default=[],
                    help="experiments to run (default: all)")
    ap.add_argument("--out-dir", default=str(ROOT / "results"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.names or list(EXPERIMENTS):
        extra = ["--out", str(out / f"{name}.csv"), "--workers", str(args.workers)]
        if name == "convergence":
            extra += ["--trace-dir", str(out / "traces")]
        print(f"[{name}]", flush=True)
        code = simulate(EXPERIMENTS[name] + extra)
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
