"""Compare the compiled kernels with the numpy fallback.

Each case runs in a fresh interpreter so that SUBDIFF_PURE_PYTHON takes
effect at import time.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

CASES = {
    "hankel_sum N=3 (400 x 4000)": """
import numpy as np
from subdiff import kernels
k = np.linspace(0.01, 20.0, 400); x = np.linspace(0.0, 40.0, 4000); w = np.exp(-x)
run = lambda: kernels.hankel_sum(3, k, x, w)
""",
    "datum_values ball_indicator (1e5)": """
import numpy as np
from subdiff import kernels
from subdiff.data import ball_indicator
d = ball_indicator(2); r = np.linspace(0.0, 3.0, 100000)
run = lambda: kernels.datum_values(d._kind, d._cparams, r)
""",
    "sphere_mean N=2 ball_indicator (200 radii)": """
import numpy as np
from subdiff.data import ball_indicator
d = ball_indicator(2); rho = np.linspace(0.0, 2.0, 200)
run = lambda: d.sphere_mean(0.7, rho)
""",
    "profile Fourier oracle N=2 (50 radii)": """
import numpy as np
from subdiff.profile import profile_oracle_fourier
r = np.linspace(0.1, 5.0, 50)
run = lambda: profile_oracle_fourier(2, 0.5, r)
""",
    "mild_solution N=3 gaussian, t=10 (spectral)": """
import numpy as np
from subdiff.data import gaussian
from subdiff.solver import mild_solution
x = np.linspace(0.0, 10.0, 200)
run = lambda: mild_solution(gaussian(3), 0.5, 10.0, x, method="spectral")
""",
}

TIMER = """
import json, timeit
from subdiff import kernels
run()
best = min(timeit.repeat(run, number=1, repeat={repeat}))
print(json.dumps({{"backend": kernels.BACKEND, "seconds": best}}))
"""


def time_case(setup, pure, repeat):
    env = dict(os.environ)
    env.pop("SUBDIFF_PURE_PYTHON", None)
    if pure:
        env["SUBDIFF_PURE_PYTHON"] = "1"
    code = setup + TIMER.format(repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print("%-46s %12s %12s %8s" % ("case", "compiled s", "python s", "speedup"))
    for name, setup in CASES.items():
        fast = time_case(setup, False, args.repeat)
        slow = time_case(setup, True, args.repeat)
        if fast["backend"] != "cython":
            print("%-46s extension not built, nothing to compare" % name)
            continue
        print("%-46s %12.4g %12.4g %7.1fx" % (name, fast["seconds"], slow["seconds"],
                                              slow["seconds"] / fast["seconds"]))


if __name__ == "__main__":
    main()
