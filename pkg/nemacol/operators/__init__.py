from nemacol.operators.stress import (
    PhysicalParams,
    physical_gradients,
    stress,
    stress_from_gradients,
    stress_transformed,
    surface_load,
    surface_load_kernel,
    tensor_divergence,
)
from nemacol.operators.transformed_operators import L1, L2, Bop, Bphys, Gop, Mop, Nop
