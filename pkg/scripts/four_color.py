"""The four-color family: critical exponent, both extremal profiles, and how the
layered templates compare with exact counts."""

from chainavoid import four_color_example, mu_valid, omega_crit
from chainavoid.templates import best_anchor, layered_template, mu_contained_closed_form

G = four_color_example()
beta = (1, 1, 1, 1)
r = omega_crit(G)
print(f"omega_crit = {r.omega_crit:.12g} (log 6 = 1.79175946923)")
for p in r.format_profiles():
    print("  optimal profile", p)
for n in range(1, 5):
    mu = mu_valid(n, G).mu
    parts = []
    for prof in r.optimal_profiles:
        anchor, _ = best_anchor(prof[: n + 1], n, beta)
        parts.append(mu_contained_closed_form(layered_template(prof[: n + 1], n, anchor), beta))
    print(f"n={n}: mu={mu}  layered templates give {parts}")

quarter = omega_crit(G, (0.25,) * 4)
print(f"omega_crit with p=(1/4)^4: {quarter.omega_crit:.12g}, profiles {quarter.format_profiles()}")
