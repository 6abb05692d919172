"""coxarith: exact arithmeticity classification of hyperbolic Coxeter groups.

Subpackages:
    fields       exact multiquadratic field arithmetic
    forms        diagonal quadratic forms, transfer, global isometry
    localfields  places, Hilbert symbols, Hasse invariants, hyperbolicity
    diagrams     Coxeter diagram parsing, Gram matrices, ambient forms
    classify     the arithmeticity ladder and descent pipeline
    lvalues      certified zeta / Dirichlet L values and the volume check
    cli          command line front end
"""

__version__ = "0.1.0"
