"""Regenerate the committed figure fixtures: ``python tests/make_golden.py``."""

from pathlib import Path

from gie.figures import fig2, fig3, fig4
from gie.io import write_csv
from gie.params import ExperimentParams, PhysicalConstants

GOLDEN = Path(__file__).parent / "golden"


def main() -> None:
    params, consts = ExperimentParams.reference(), PhysicalConstants()
    write_csv(GOLDEN / "fig2.csv", *fig2(params, consts))
    curves, summary = fig3(params, consts)
    write_csv(GOLDEN / "fig3.csv", *curves)
    write_csv(GOLDEN / "fig3_onset.csv", *summary)
    write_csv(GOLDEN / "fig4.csv", *fig4(params, consts))


if __name__ == "__main__":
    main()
