from nemacol.transform.cutoff import CutoffSpec, chi, chi_derivatives
from nemacol.transform.lift import LiftField, build_b, particle_gap
from nemacol.transform.flow_map import (
    TransformField,
    advance_flow,
    identity_transform,
    invert_map,
    tensors,
)
