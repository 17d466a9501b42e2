// Thin wrappers so the rest of the crate does not care whether float
// intrinsics come from std or libm.

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Cosine of an angle in degrees, exact at the right angle.
pub(crate) fn cos_deg(deg: f64) -> f64 {
    if deg == 90.0 {
        0.0
    } else if deg == 60.0 {
        0.5
    } else if deg == 120.0 {
        -0.5
    } else {
        libm::cos(deg.to_radians())
    }
}

pub(crate) fn sin_deg(deg: f64) -> f64 {
    if deg == 90.0 {
        1.0
    } else {
        libm::sin(deg.to_radians())
    }
}

#[inline]
pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    sqrt(dot(a, a))
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Euclidean distance computed symmetrically so that d(a, b) == d(b, a) bit for bit.
#[inline]
pub(crate) fn dist(a: Vec3, b: Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    sqrt(dx * dx + dy * dy + dz * dz)
}
