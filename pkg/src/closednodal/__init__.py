"""Dirichlet eigenfunctions on perturbed ball-and-shell domains.

Domains are described implicitly (:mod:`closednodal.geometry`), voxelised
and discretised by finite differences (:mod:`closednodal.discretize`), and
solved for their lowest eigenpairs (:mod:`closednodal.eigensolve`). The
second eigenfunction is then tested for a negative nodal domain compactly
inside the unit ball (:mod:`closednodal.nodal`), and the topology of the
construction is checked on the voxel solids (:mod:`closednodal.topology`).
"""

from .config import ExperimentConfig, load_config, parse_config
from .discretize import LaplacianOperator, VoxelGrid, assemble_laplacian, boundary_distance_field, voxelize
from .eigensolve import Spectrum, simplicity_report, smallest_eigenpairs
from .geometry import (
    Ball,
    Fournais,
    Passage,
    Pole,
    Sheet,
    Shell,
    Smoothed,
    SpherePointSet,
    epsilon_upper_bound,
    make_fournais,
    make_passage,
    make_pole,
    make_sheet,
    smooth_domain,
)
from .harness import fibonacci_centers, find_config, run_sequence, run_single
from .nodal import NodalReport, containment_report, interface_check, nodal_domains
from .oracles import ball_eigenvalue, choose_R_window, shell_ground_eigenvalue
from .topology import TopologyReport, betti_mod2, complement_components, euler_characteristic

__version__ = "0.1.0"
