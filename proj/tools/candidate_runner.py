"""Adapter between the ask/tell line protocol and a Python optimizer class
exposing __init__(self, budget, dim) and __call__(self, func).

usage: candidate_runner.py <script.py> <ClassName>
"""

import importlib.util
import json
import random
import sys


def send(msg):
    sys.stdout.write(json.dumps(msg) + "\n")
    sys.stdout.flush()


def main():
    if len(sys.argv) != 3:
        sys.stderr.write("usage: candidate_runner.py <script.py> <ClassName>\n")
        return 2
    init = json.loads(sys.stdin.readline())
    if init.get("type") != "init":
        sys.stderr.write("expected init message\n")
        return 2

    random.seed(init["seed"])
    try:
        import numpy as np

        np.random.seed(init["seed"] % (2**32))
        lb, ub = np.array(init["lb"], dtype=float), np.array(init["ub"], dtype=float)
        as_list = lambda x: [float(v) for v in np.asarray(x, dtype=float).ravel()]
    except ImportError:
        lb, ub = list(init["lb"]), list(init["ub"])
        as_list = lambda x: [float(v) for v in x]

    class Bounds:
        pass

    class Func:
        def __init__(self):
            self.bounds = Bounds()
            self.bounds.lb = lb
            self.bounds.ub = ub
            self.dim = init["dim"]
            self.budget = init["budget"]

        def __call__(self, x):
            send({"type": "ask", "x": as_list(x)})
            tell = json.loads(sys.stdin.readline())
            return tell["fitness"]

    spec = importlib.util.spec_from_file_location("candidate", sys.argv[1])
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    algorithm = getattr(module, sys.argv[2])(budget=init["budget"], dim=init["dim"])
    algorithm(Func())
    send({"type": "done"})
    return 0


if __name__ == "__main__":
    sys.exit(main())
