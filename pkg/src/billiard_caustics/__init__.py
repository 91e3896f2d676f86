"""Resonant caustics of elliptic billiards and their break-up under perturbation."""
from .billiard_map import ConjugatePoint, PhasePoint, step, step_n
from .caustics import CausticParams, PonceletPolygon, caustic_params, poncelet_polygon, resonant_lambda
from .errors import ConvergenceError, DomainError
from .melnikov import Verdict, classify_constancy, melnikov_circle, melnikov_ellipse, melnikov_twist
from .persistence import melnikov_consistency, separation_profile, solve_upsilon
from .special_functions import am, cn, complete_K, incomplete_F, sn
from .tables import (
    EllipseTable,
    FourierSeries,
    PerturbedCircleTable,
    PerturbedEllipseTable,
    table_from_dict,
)
