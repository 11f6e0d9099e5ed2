"""
Independent checks of the reduced model
=======================================

Two numerical oracles rebuild pieces of the reduced description from the
full atom-cavity problem:

* projecting the full Hamiltonian onto explicitly displaced vacua, and
* integrating the Born-Markov memory kernel against the thermal
  correlation function of an ohmic bath.

The second takes roughly twenty seconds.
"""

from dickeqme import (FockTruncation, ModelParams, ReservoirParams, dissipator_numeric_oracle,
                      dressed_subspace_check)
from dickeqme.reservoir import correlation_closed_form, correlation_cutoff_series

p = ModelParams(n_atoms=4, omega_c=400.0, lam=10.0, gamma=100.0)
r = ReservoirParams(eta=0.125, beta=0.02)

print(dressed_subspace_check(p, FockTruncation(n_max=40)).summary())

# %%
# The closed-form correlation function is the infinite-cutoff limit.  At a
# finite cutoff the difference falls off like 1 / cutoff, which dominates
# once the closed form has decayed exponentially.
for n_beta in (0.5, 1.0, 2.0):
    t = n_beta * r.beta
    exact = correlation_cutoff_series(r, t, cutoff=1e4 / r.beta).real
    print(f"t = {n_beta} beta: closed form {correlation_closed_form(r, t):+.6e}, "
          f"cutoff 1e4/beta {exact:+.6e}")

# %%
rep = dissipator_numeric_oracle(p, r)
print()
print(rep.summary())
print(f"measured / closed-form rates: {rep.data['gamma_ex_ratio']:.12f} "
      f"and {rep.data['gamma_de_ratio']:.12f}")
