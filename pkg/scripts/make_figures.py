"""Regenerate every figure data bundle (CSV + JSON manifest) in one go.

    python scripts/make_figures.py --out figures/
    python scripts/make_figures.py --out figures/ --only fig4 fig6
"""

import argparse
import time
import warnings

from dmchain.sweep import FIGURES, figure_bundle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--only", nargs="+", choices=FIGURES, default=FIGURES)
    args = ap.parse_args()

    for name in args.only:
        t0 = time.monotonic()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            paths = figure_bundle(name, args.out)
        print("%s: %s (%.1fs)"
              % (name, ", ".join(paths), time.monotonic() - t0))


if __name__ == "__main__":
    main()
