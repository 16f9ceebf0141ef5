"""
Parsing a symbol and locating its singular set
==============================================

A symbol g is written as a small expression in the variable ``x``.  The
parser folds named parameters into constants, the derivative is taken
symbolically, and the singular set collects the zeros of g' together with
the points where g itself is not smooth.
"""

from strongtime import build_symbol, parse, pretty, singular_points
from strongtime.expr import differentiate

# parameters are bound at parse time
tree = parse("sqrt(x^2 + m^2)", {"m": 1.0})
print("g  =", pretty(tree))
print("g' =", pretty(differentiate(tree)))

# the chain rule handles non-integer powers
print("d/dx (x^2 + 1)^0.3 =", pretty(differentiate(parse("(x^2 + 1)^0.3"))))

# log|x| is not smooth at 0, and its derivative never vanishes
for text in ["x^2/2", "log(abs(x))", "sqrt(x^2 + 1)", "x^3/3", "sin(x)"]:
    sym = build_symbol(text, window=(-10, 10))
    print(f"{text:<16} K = {list(sym.K)!s:<8} Z = {[round(z, 6) for z in singular_points(sym)]}")

# a constant symbol is rejected: its derivative vanishes everywhere
try:
    build_symbol("5")
except ValueError as exc:
    print("rejected:", exc)
