//! Trilinear (8-node) hexahedral element: shape functions, stiffness and
//! consistent load integration with 2x2x2 Gauss quadrature.
//!
//! Elements are axis-aligned boxes, so the Jacobian is diagonal,
//! J = diag(hx/2, hy/2, hz/2), and global shape-function gradients are the
//! reference gradients scaled by 2/h per axis.

/// Corner sign pattern of the reference cube, matching the mesh corner order.
pub const CORNER_SIGNS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// 2x2x2 Gauss points on [-1,1]^3; all weights are 1.
pub fn gauss_points() -> [[f64; 3]; 8] {
    let g = 1.0 / 3.0f64.sqrt();
    CORNER_SIGNS.map(|s| [s[0] * g, s[1] * g, s[2] * g])
}

/// Shape function values N_a(xi) for the 8 corners.
pub fn shape_values(xi: [f64; 3]) -> [f64; 8] {
    CORNER_SIGNS.map(|s| {
        0.125 * (1.0 + s[0] * xi[0]) * (1.0 + s[1] * xi[1]) * (1.0 + s[2] * xi[2])
    })
}

/// Global shape-function gradients dN_a/dx_j for an element with edge
/// lengths `h`, evaluated at local coordinates `xi`.
pub fn shape_gradients(xi: [f64; 3], h: [f64; 3]) -> [[f64; 3]; 8] {
    let scale = [2.0 / h[0], 2.0 / h[1], 2.0 / h[2]];
    CORNER_SIGNS.map(|s| {
        [
            0.125 * s[0] * (1.0 + s[1] * xi[1]) * (1.0 + s[2] * xi[2]) * scale[0],
            0.125 * s[1] * (1.0 + s[0] * xi[0]) * (1.0 + s[2] * xi[2]) * scale[1],
            0.125 * s[2] * (1.0 + s[0] * xi[0]) * (1.0 + s[1] * xi[1]) * scale[2],
        ]
    })
}

/// Element stiffness matrix (24x24, dof order = 3 per corner) for isotropic
/// linear elasticity with Lame parameters (lambda, mu). Exactly symmetric:
/// only the upper triangle is integrated and then mirrored.
pub fn element_stiffness(h: [f64; 3], lambda: f64, mu: f64) -> [[f64; 24]; 24] {
    let det_j = h[0] * h[1] * h[2] / 8.0;
    let mut k = [[0.0f64; 24]; 24];

    for gp in gauss_points() {
        let grads = shape_gradients(gp, h);
        // k[3a+i][3b+j] += lambda dNa_i dNb_j + mu dNa_j dNb_i
        //                + mu delta_ij (grad Na . grad Nb), scaled by det J.
        for a in 0..8 {
            for b in 0..8 {
                let ga = grads[a];
                let gb = grads[b];
                let gab = ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
                for i in 0..3 {
                    for j in 0..3 {
                        let p = 3 * a + i;
                        let q = 3 * b + j;
                        if p > q {
                            continue;
                        }
                        let mut v = lambda * ga[i] * gb[j] + mu * ga[j] * gb[i];
                        if i == j {
                            v += mu * gab;
                        }
                        k[p][q] += v * det_j;
                    }
                }
            }
        }
    }
    for p in 0..24 {
        for q in 0..p {
            k[p][q] = k[q][p];
        }
    }
    k
}

/// Consistent element load vector for a body force density `f`, given the
/// element's corner-0 position and extents; `f` is evaluated at the global
/// position of each Gauss point.
pub fn element_load(
    origin: [f64; 3],
    h: [f64; 3],
    f: &mut impl FnMut([f64; 3]) -> [f64; 3],
) -> [f64; 24] {
    let det_j = h[0] * h[1] * h[2] / 8.0;
    let mut out = [0.0f64; 24];
    for gp in gauss_points() {
        let n = shape_values(gp);
        let x = [
            origin[0] + 0.5 * (gp[0] + 1.0) * h[0],
            origin[1] + 0.5 * (gp[1] + 1.0) * h[1],
            origin[2] + 0.5 * (gp[2] + 1.0) * h[2],
        ];
        let fx = f(x);
        for a in 0..8 {
            let w = n[a] * det_j;
            out[3 * a] += w * fx[0];
            out[3 * a + 1] += w * fx[1];
            out[3 * a + 2] += w * fx[2];
        }
    }
    out
}
