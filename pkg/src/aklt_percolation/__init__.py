"""Monte Carlo study of POVM-induced random graphs on trivalent lattices.

Samples the correlated three-outcome measurement ensemble on the four
3-regular Archimedean lattices, reduces configurations to their domain
graphs, and decides computational usefulness through percolation criteria.
"""

from .lattices import (BC_CYLINDER, BC_TORUS, Lattice, LatticeKind,
                       LatticeSizeError, build_lattice, enumerate_triangles,
                       kagome_from_star, lattice_from_graph)
from .sampler import (ChainParams, PovmConfig, PovmLabel, local_acceptance,
                      metropolis_sweep, random_config, run_chain, run_chains,
                      weight_exponent)
from .domains import (DomainGraph, DomainPartition, Estimate, GraphSample,
                      GraphStats, build_domain_graph, compute_stats,
                      identify_domains, measure_graph_ensemble)
from .percolation import (PercolationCurve, ThresholdEstimate,
                          bare_lattice_percolation, deletion_sweep,
                          estimate_threshold, sample_domain_graphs, spans)
from .graph_rules import (SimpleGraph, local_complement, measure_pauli,
                          reduce_to_honeycomb, suppress_degree2)

__version__ = "0.1.0"
