"""Metric components are formulas in z1..zn and their conjugates zb1..zbn.

The engine treats z and zb as independent variables, so derivatives are
exact Wirtinger derivatives rather than finite differences.
"""
from chernlab.expr import ChartPoint, evaluate, parse_expression, to_string, wirtinger_derivative

# %% parse
e = parse_expression("log(1 + z1*zb1) + conj(z2)*z1", 2)
print("parsed:        ", to_string(e))

# %% differentiate in z1 and in zb1
d = wirtinger_derivative(e, 1)
db = wirtinger_derivative(e, 1, antiholomorphic=True)
print("d/dz1:         ", to_string(d))
print("d/dzb1:        ", to_string(db))

# %% evaluate at a point
p = ChartPoint((1 + 1j, 0.5))
print("value at p:    ", evaluate(e, p))
print("d/dz1 at p:    ", evaluate(d, p))

# %% errors point at the offending position
try:
    parse_expression("z1 + (zb2 * 3", 2)
except ValueError as err:
    print("syntax error:  ", err)
