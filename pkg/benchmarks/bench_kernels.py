"""Compare the compiled CSR matvec kernel against the numpy fallback.

Builds the flux-step matrix of a realistic majorant minimization (the
largest repeated solve in the pipeline), then times raw matvecs and a
full preconditioned CG solve under both kernels.  The fallback is forced
by clearing the module handle to the compiled extension, which is
exactly what FLUXBOUND_PURE_PYTHON=1 does at import time.

Run from the repository root:

    python3 benchmarks/bench_kernels.py --n 40 --order 1
"""

import argparse
import time

import numpy as np

import fluxbound.sparse as sparse
from fluxbound.assembly import assemble_majorant, solve_primal
from fluxbound.mesh import build_rect_mesh
from fluxbound.problem import example1_problem
from fluxbound.spaces import FluxSpace, ScalarSpace


def build_flux_step_system(n, order):
    spec = example1_problem()
    mesh = build_rect_mesh((0.0, 1.0), (0.0, 1.0), n, n)
    v = solve_primal(ScalarSpace(mesh, 1), spec)
    system = assemble_majorant(FluxSpace(mesh, order), v, spec)
    scale = system.c_f**2 / system.lambda_low
    mat = system.s.with_data(scale * system.s.data + 2.0 * system.m.data)
    rhs = -scale * system.b + 2.0 * system.z
    return mat, rhs


def time_matvec(mat, x, repeats):
    out = np.empty(mat.shape[0])
    mat.matvec(x, out=out)                    # warm up caches
    t0 = time.perf_counter()
    for _ in range(repeats):
        mat.matvec(x, out=out)
    return (time.perf_counter() - t0) / repeats


def time_cg(mat, rhs):
    t0 = time.perf_counter()
    x = sparse.cg_solve(mat, rhs, tol=1e-10, check_symmetry=False)
    elapsed = time.perf_counter() - t0
    res = np.linalg.norm(rhs - mat @ x) / np.linalg.norm(rhs)
    return elapsed, res


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=40,
                        help="mesh cells per direction (default 40)")
    parser.add_argument("--order", type=int, default=1, choices=(0, 1, 2),
                        help="flux space order (default 1)")
    parser.add_argument("--repeats", type=int, default=200,
                        help="matvec repetitions per measurement")
    args = parser.parse_args()

    if sparse.kernel_backend() != "compiled":
        parser.error("compiled kernel unavailable; build the extension first "
                     "(pip install -e . --no-build-isolation)")

    mat, rhs = build_flux_step_system(args.n, args.order)
    x = np.random.default_rng(0).standard_normal(mat.shape[1])
    print(f"flux-step matrix: {mat.shape[0]} DOFs, {mat.nnz} stored entries")

    results = {}
    for backend in ("compiled", "python"):
        saved = sparse._csr_core
        if backend == "python":
            sparse._csr_core = None
        try:
            mv = time_matvec(mat, x, args.repeats)
            cg, res = time_cg(mat, rhs)
        finally:
            sparse._csr_core = saved
        results[backend] = (mv, cg)
        print(f"{backend:>9}: matvec {mv * 1e6:9.1f} us   "
              f"cg_solve {cg:7.3f} s   (residual {res:.1e})")

    mv_ratio = results["python"][0] / results["compiled"][0]
    cg_ratio = results["python"][1] / results["compiled"][1]
    print(f"  speedup: matvec {mv_ratio:.1f}x, cg_solve {cg_ratio:.1f}x")


if __name__ == "__main__":
    main()
