"""
Kernelsmith Package

This package shrinks the numbers inside weighted combinatorial problem
instances to polynomially many bits while keeping every optimal solution.
"""
