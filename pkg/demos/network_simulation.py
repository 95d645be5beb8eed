"""Monte Carlo run of the action-dependent coding scheme over a two-link network.

With A = X and budget 0.5 the region needs R_X + R_Y >= 1.  A sum
capacity of 4/3 decodes most of the time; 0.9 almost never does.
"""

from actionsw.binary_examples import example2_model
from actionsw.coding_sim import TypicalitySpec, simulate_network_scheme
from actionsw.netgraph import two_link_network

if __name__ == "__main__":
    model = example2_model(0.5, 0.5, 0.0, 0.0)
    spec = TypicalitySpec(12, 0.25)
    for caps in [(14 / 12, 2 / 12), (0.75, 0.15)]:
        rep = simulate_network_scheme(two_link_network(*caps), model, None, spec, trials=200, seed=7)
        events = ", ".join(f"{k}={v:.3f}" for k, v in rep.event_rates.items() if v > 0)
        print(f"capacities ({caps[0]:.3f}, {caps[1]:.3f}): error {rep.error_rate:.3f} [{events}], mean cost {rep.mean_cost:.3f}")
