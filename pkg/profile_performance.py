"""Profile one uniform level of the contact solver."""
import argparse
import sys
import time
from pathlib import Path

# Add backend to path
backend_path = Path(__file__).parent / "backend"
sys.path.insert(0, str(backend_path))


def time_function(func_name, func, *args, **kwargs):
    """Time a function and print results."""
    print(f"\n⏱️  {func_name}...")
    start = time.time()
    result = func(*args, **kwargs)
    elapsed = time.time() - start
    print(f"   ✅ Done in {elapsed:.2f}s")
    return result, elapsed


def profile_level(problem_id: int, method: str, n: int):
    """Profile mesh build, assembly, PDAS and estimation on an n x n structured mesh."""
    from harness.level_solver import build_system, resolve_penalty
    from modules.Assembly_Module.dg_operator import DGMethod
    from modules.Estimator_Module.residual_estimator import compute_estimators
    from modules.Mesh_Module.mesh import build_structured_unit_square
    from modules.Problems_Module.dg_error import compute_dg_error
    from modules.Problems_Module.model_problems import build_problem
    from modules.Solver_Module.multiplier import recover_multiplier
    from modules.Solver_Module.pdas import pdas_solve

    print("=" * 70)
    print("🔍 PERFORMANCE PROFILING")
    print("=" * 70)

    timings = {}
    problem = build_problem(problem_id)
    method = DGMethod(method)
    eta = resolve_penalty(method, None)

    mesh, timings['mesh'] = time_function(
        f"Structured mesh n={n}", build_structured_unit_square, n, problem.boundary
    )
    print(f"   {mesh.n_triangles:,} triangles, {12 * mesh.n_triangles:,} dofs")

    system, timings['assembly'] = time_function(
        "Assembly (operator, load, constraints)", build_system, problem, mesh, method, eta
    )
    result, timings['pdas'] = time_function("PDAS solve", pdas_solve, system)
    print(f"   {result.iterations} iterations, active={int(result.partition.active.sum())}")

    multiplier, timings['multiplier'] = time_function(
        "Multiplier recovery", recover_multiplier, result.field, system, result.partition
    )
    report, timings['estimators'] = time_function(
        "Estimator contributions", compute_estimators, result.field, multiplier, problem, result.partition
    )
    print(f"   eta_h = {report.total:.4e}")

    if problem.has_exact_solution:
        error, timings['error'] = time_function("DG error", compute_dg_error, result.field, problem)
        print(f"   error = {error:.4e}")

    # Summary
    print("\n" + "=" * 70)
    print("📊 PERFORMANCE SUMMARY")
    print("=" * 70)

    total_time = sum(timings.values())
    sorted_timings = sorted(timings.items(), key=lambda x: x[1], reverse=True)

    print(f"\n{'Step':<30} {'Time':<10} {'% of Total':<12}")
    print("-" * 70)
    for step, duration in sorted_timings:
        if duration > 0:
            percentage = (duration / total_time) * 100
            print(f"{step:<30} {duration:>6.2f}s    {percentage:>5.1f}%")
    print("-" * 70)
    print(f"{'TOTAL':<30} {total_time:>6.2f}s")
    print("\n" + "=" * 70)

    return timings


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--problem", type=int, choices=(1, 2), default=1)
    parser.add_argument("--method", choices=("sipg", "nipg"), default="sipg")
    parser.add_argument("--n", type=int, default=32, help="cells per side")
    args = parser.parse_args()

    try:
        profile_level(args.problem, args.method, args.n)
    except Exception as e:
        print(f"\n❌ Error during profiling: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
