"""Study drivers: level solves, convergence and adaptive runs, results output, CLI."""
