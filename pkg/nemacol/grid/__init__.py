from nemacol.grid.annulus import (
    AnnulusGrid,
    boundary_integral,
    boundary_values,
    conform,
    div,
    flux_divergence,
    grad,
    grad_transpose,
    hessian,
    integrate,
    laplacian,
    normal_derivative,
    perp,
)
