# Intervals in Z/p: the algebra norm grows slowly, the coset weight does not.
#
# In a cyclic group of prime order the only cosets are singletons and the
# whole group, so 1_[0,L) needs weight min(L, p - L + 1) while its algebra
# norm grows roughly like log L.

# %%
import math

from idempotent import FiniteAbelianGroup, indicator, oracle_min_l1, wiener_norm

p = 31
G = FiniteAbelianGroup((p,))

# %%
print(f"{'L':>3} {'norm':>8} {'norm/log(L+1)':>14} {'weight':>7}")
for L in range(1, p):
    f = indicator(G, range(L))
    norm = wiener_norm(f)
    weight = oracle_min_l1(f).l1_weight
    assert weight == min(L, p - L + 1)
    print(f"{L:>3} {norm:8.4f} {norm / math.log(L + 1):14.4f} {weight:>7}")

# %%
# Up to p/2 the weight is L while the norm is about a constant times log L,
# so the weight grows exponentially in the norm.
