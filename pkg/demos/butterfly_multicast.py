"""Random linear multicast over the butterfly: error rate either side of the min-cut capacity 2."""

from actionsw.netgraph import min_cut, multicast_butterfly
from actionsw.rlnc import multicast_simulate

if __name__ == "__main__":
    net = multicast_butterfly()
    cuts = [min_cut(net, [net.s1], t) for t in net.terminals]
    print(f"min cut from s1 to each terminal: {cuts}")
    for rate, trials in [(1.0, 500), (1.5, 500), (2.0, 500), (2.5, 100)]:
        res = multicast_simulate(net, net.s1, rate, 8, trials, seed=1)
        print(f"R = {rate:3.1f}: {res.messages:6d} messages, error rate {res.error_rate:.3f}, union bound {res.bound:.3g}")
