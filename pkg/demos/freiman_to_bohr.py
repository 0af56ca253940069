# From a set of small doubling to a Bohr set inside its iterated differences.
#
# Every inclusion in the certificate is recomputed from scratch by verify().
# For a subgroup the Bohr set B_1 is the subgroup itself.  For an interval in
# Z/p the constants are calibrated for large groups: the almost-period set X
# is small next to the rank of the growth system, so B_1 collapses to {0}.
# The certificate is still valid, only uninformative at this scale.

# %%
from idempotent import FiniteAbelianGroup, enumerate_subgroups
from idempotent.freiman import freiman_bohr


def report(A, G):
    cert = freiman_bohr(A, G, seed=0)
    B1 = sorted(cert.bohr.bohr_set(1))
    print(f"|A| = {len(A)}, |A + A| = {len(G.sumset(A, A))}, |X| = {len(cert.X)}")
    print(f"Bohr rank {len(cert.bohr.characters)}, |B_1| = {len(B1)}")
    print("B_1 =", B1 if len(B1) <= 12 else f"{B1[:12]} ...")
    print(f"density of A on a translate of B_1: {cert.density_uniform:.4f}")
    for name, ok in cert.verify().items():
        print(f"{name:>18}: {ok}")
    return cert


# %%
G = FiniteAbelianGroup((24,))
H = [H for H in enumerate_subgroups(G) if H.order == 6][0]
cert = report(H.member_set, G)
assert cert.bohr.bohr_set(1) == H.member_set

# %%
for n, L in ((127, 7), (509, 120)):
    print()
    cert = report(frozenset(range(L)), FiniteAbelianGroup((n,)))
    assert cert.bohr.bohr_set(1) == {0}
