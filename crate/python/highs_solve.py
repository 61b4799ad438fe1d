"""External-solver adapter for ucf: solves an MPS file with HiGHS.

Usage: highs_solve.py <mps> <sol> <lp|mip>
"""

import sys

import highspy


def main() -> int:
    mps, sol, mode = sys.argv[1:4]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 1e-9)
    if h.readModel(mps) != highspy.HighsStatus.kOk:
        print(f"cannot read {mps}", file=sys.stderr)
        return 1
    if mode == "lp":
        lp = h.getLp()
        n = lp.num_col_
        h.changeColsIntegrality(n, list(range(n)), [highspy.HighsVarType.kContinuous] * n)
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        print(f"status {h.modelStatusToString(h.getModelStatus())}", file=sys.stderr)
        return 2
    info = h.getInfo()
    values = h.getSolution().col_value
    names = h.getLp().col_names_
    with open(sol, "w") as out:
        out.write(f"objective {info.objective_function_value!r}\n")
        for name, v in zip(names, values):
            out.write(f"{name} {v!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
