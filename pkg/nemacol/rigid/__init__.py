from nemacol.rigid.rigid_body import (
    FrameHistory,
    PrescribedMotion,
    RigidBody,
    RigidState,
    RigidState2D,
    RigidState3D,
    inertia_spatial,
    kinetic_energy,
    newton_euler_step,
    orthogonality_drift,
    recover_frame,
    rigid_velocity,
    rotation,
)
