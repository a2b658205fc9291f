"""Print the two numeric two-agent OR examples next to the solver's optimum."""
from agency.boolfn import anonymous_or
from agency.purity import pop
from agency.solver_mixed import indifference_payment, principal_utility_mixed, solve_mixed, strong_eq_check
from agency.solver_pure import solve_pure
from agency.technology import agents_of, eval_mixed


def show(gamma, delta, v, q=(0.92, 0.92)):
    tech = anonymous_or(2, gamma, delta)
    print(f"OR, two agents, gamma={gamma}, delta={delta}, v={v}")
    print("  table            ", " ".join(f"{x:.4f}" for x in tech.table))
    print(f"  t(q) at q={q[0]}    {eval_mixed(tech, q):.5f}")
    print(f"  payment at q      {indifference_payment(tech, 0, q):.5f}")
    print(f"  utility at q      {principal_utility_mixed(tech, q, v):.5f}")
    pc = solve_pure(tech, v)
    print(f"  pure optimum      {[i + 1 for i in agents_of(pc.mask)]} utility {pc.utility:.5f}")
    m = solve_mixed(tech, v)
    print(f"  mixed optimum     q={m.profile.q[0]:.5f},{m.profile.q[1]:.5f} utility {m.utility:.5f}")
    verdict = strong_eq_check(tech, m.profile.q, m.payments)
    print(f"  joint deviation   gains {', '.join(f'{g:.4f}' for g in verdict.gains)}")
    r = pop(tech)
    print(f"  price of purity   {r.pop:.6f} at v={r.witness_v:.3f}")
    print()


if __name__ == "__main__":
    show(0.09, 0.91, 348)
    show(0.0001, 0.9, 233)
