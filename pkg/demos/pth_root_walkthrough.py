"""Take a circuit for g^p apart and recover a circuit for g."""

from charp.ff import get_field
from charp.ir import CircuitBuilder, build_power, metrics
from charp.poly import expand, expand_all
from charp.transform import circuit_bound, mod_p_decompose_circuit, pth_root_circuit

F = get_field(3)
b = CircuitBuilder(F, 2)
x, y = b.input(0), b.input(1)
g = b.build([b.add(b.mul(x, y), b.const(2), 1, 1)])
print("g          =", expand(g))

powered = build_power(g, 3)
print("g^3        =", expand(powered))
print("sizes      : g", g.size, "| g^3", powered.size)

# every type vector a in {0,1,2}^2 gets one output computing f_a with f = sum f_a^3 x^a
dec = mod_p_decompose_circuit(powered, prune=False)
print(f"decomposed : {dec.circuit.size} gates before pruning, bound {dec.bound}")
polys = expand_all(dec.circuit)
for a, i in sorted(dec.index.items()):
    if polys[i]:
        print(f"  type {list(a)}: {polys[i]}")

root = pth_root_circuit(powered, verify=True)
print("root       =", expand(root), "| size", root.size, "| degree", metrics(root).degree_bound)
print("bound check:", root.size, "<=", circuit_bound(powered.size, 3, 2))
