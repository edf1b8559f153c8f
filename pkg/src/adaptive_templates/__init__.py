"""Adaptive template functions for featurizing persistence diagrams."""

from .bottleneck import bottleneck_distance, is_delta_matching
from .diagrams import Frame, PersistenceDiagram, PersistencePoint, parse_diagram, to_birth_death, to_birth_lifetime
from .synth import MANIFOLDS, rips_persistence, sample_manifold
from .templates import EllipseTemplate, PolynomialMeshTemplate, TemplateSystem, TentTemplate, featurize, rescale_translate

__version__ = "0.1.0"
