"""
coarsekit

Executable coarse geometry on finite truncations of coarse disjoint unions.

Responsibilities:
- Build finite metric spaces, graph metrics and coarse disjoint unions
- Certify (or refute) vertex expansion of finite graphs
- Measure coarse maps: moduli, closeness, finite-to-one bounds, component routing
- Injectivize and bijectivize coarse maps via Hall matchings and
  König's chain tracing
- Represent uniformly finite 0/1-chains and witness their vanishing with
  max-flow filling certificates

Modules included:
- config.py: environment / .env configuration
- errors.py: exception hierarchy
- enumeration.py: Gray-code subset scans shared by the exact checkers
- metric_core.py: FiniteSpace, GraphSpace, CoarseUnion, boundaries
- expansion.py: exact and search-based expander verification
- coarse_maps.py: CoarseMapTable and its quantitative invariants
- matching.py: Hall selections and deficiency certificates
- uf_homology.py: chains, boundary operator, Whyte checks, fillings
- rigidity.py: the condition checkers and bijection constructors
- constructions.py: stackings, bipartite doubles, random regular graphs
- fileio.py / reporting.py / cli.py: JSON documents, manifests, command line
"""

__version__ = "0.4.0"
