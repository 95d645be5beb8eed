"""Print the rate-region frontiers of both binary examples for the three action scenarios."""

import numpy as np

from actionsw.binary_examples import example1_model, example2_model
from actionsw.region import Scenario, trace_frontier

RES = 129


def show(title, model):
    print(title)
    xs = np.linspace(0.0, 2.0, 9)
    print("  R_X    " + "  ".join(f"{x:5.2f}" for x in xs))
    for sc in Scenario:
        fr = trace_frontier(model, sc, RES)
        ry = fr.ry_at(xs)
        print(f"  case {sc.value} " + "  ".join("    -" if np.isinf(v) else f"{v:5.2f}" for v in ry))
    print()


if __name__ == "__main__":
    show("Example 1 (sensor activation), budget 0.3: smallest R_Y per R_X", example1_model(0.3))
    show("Example 2 (Z/S channels, delta = 0.5), budget 0.3", example2_model(0.5, 0.3))
