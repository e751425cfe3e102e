"""A generator built from a hard family over a Reed-Solomon design, its
parameter escalation and the hitting set it would induce."""

from charp.ff import get_field
from charp.gen import bootstrap_generator, hitting_set_from_generator, ki_generator, power_sum_oracle
from charp.designs import rs_design
from charp.poly import SparsePoly

F2 = get_field(2)
G = bootstrap_generator(power_sum_oracle(F2, 2), 2)
for line in G.provenance:
    print("#", line)
prm = G.params
print(f"seed {G.seed_len}, outputs {G.nvars_out}, component degree {G.degree}")
print(f"hitting set would hold {prm.hitting_set_size():.3e} points "
      f"({prm.nominal_size():.3e} without escalation)")

# a toy generator small enough to expand into an explicit hitting set
h = SparsePoly(F2, 2, {(1, 1): 1, (1, 0): 1})
toy = ki_generator(h, 4, rs_design(4, 2, 2, 2))
H = hitting_set_from_generator(toy, 1, dedup=True)
print(f"toy generator: seed {toy.seed_len}, {len(H.points)} distinct points over {H.field.name()}")
for pt in H.points[:5]:
    print("  ", pt)
