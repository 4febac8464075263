"""Exact computational algebra for algebraic Toeplitz and Cuntz-Pimsner rings.

Subpackages by layer:

* ``abgroup``: integer matrices, Smith normal form, f.g. abelian groups.
* ``ringcore``: exact coefficient rings and rings with local units.
* ``funcmod``: functional modules, finite-rank operators, correspondences.
* ``fock``: truncated Fock modules, Toeplitz operators, quasi-homomorphism
  defects, and the rotational homotopy.
* ``leavitt``: quivers, Leavitt path algebras, K-group pipelines.
* ``selfsim``: self-similar groups and their correspondences.
* ``cli``: the ``pimsner`` command line driver.
"""

__version__ = "0.1.0"
