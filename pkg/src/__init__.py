"""
Laurent Orbits: exact truncated Laurent series over prime fields.

Layered architecture:
  Layer 1: algebra.field   : coefficient arithmetic in F_p (or exact rationals)
  Layer 2: algebra.series  : truncated Laurent series with explicit precision
  Layer 3: algebra.compose : substitution t -> s, the uniformiser group, reversion
  Layer 4: orbits.hensel   : Hensel-like solver for f(y) = b near f(t)
  Layer 5: orbits.orbit    : orbit sampling, ball bounds, membership search
  Layer 6: formulas        : first-order definitions, evaluators and builders
"""
