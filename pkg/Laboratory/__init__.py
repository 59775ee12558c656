# Laboratory/__init__.py
# Singular integral laboratory: Quadrature and Expressions underpin Kernels and Operator,
# which ClassA, Lebesgue and Rate check; Reporting writes their results.
