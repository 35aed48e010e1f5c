//! Arithmetic modulo the Mersenne prime 2^61 - 1, plus the dense linear
//! algebra and interpolation the matching code needs.

pub const P: u64 = (1 << 61) - 1;

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
pub fn neg(a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        P - a
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    let x = a as u128 * b as u128;
    let s = ((x as u64) & P) + (x >> 61) as u64;
    if s >= P {
        s - P
    } else {
        s
    }
}

pub fn pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

/// Panics on zero.
pub fn inv(a: u64) -> u64 {
    assert!(a != 0, "inverse of zero");
    pow(a, P - 2)
}

/// Pfaffian of an `m × m` skew-symmetric matrix in row-major order.
/// Destroys `a`.
///
/// Each step replaces the trailing block by `pivot` times its Schur
/// complement, so a single inversion at the end removes the accumulated
/// scale.
pub fn pfaffian(a: &mut [u64], m: usize) -> u64 {
    if m % 2 == 1 {
        return 0;
    }
    let mut num = 1;
    let mut den = 1;
    for k in (0..m).step_by(2) {
        let Some(j) = (k + 1..m).find(|&j| a[k * m + j] != 0) else {
            return 0;
        };
        if j != k + 1 {
            swap_index(a, m, j, k + 1);
            num = neg(num);
        }
        let pivot = a[k * m + k + 1];
        num = mul(num, pivot);
        let rest = (m - k - 2) / 2;
        den = mul(den, pow(pivot, rest as u64));
        let (head, tail) = a.split_at_mut((k + 2) * m);
        let (rk, rk1) = (&head[k * m..(k + 1) * m], &head[(k + 1) * m..]);
        // pivot · S_ij = pivot · A_ij + A_ik A_(k+1)j - A_i(k+1) A_kj
        for row in tail.chunks_exact_mut(m) {
            let (aik, aik1) = (row[k], row[k + 1]);
            for c in k + 2..m {
                row[c] = add(mul(pivot, row[c]), sub(mul(aik, rk1[c]), mul(aik1, rk[c])));
            }
        }
    }
    mul(num, inv(den))
}

/// Swaps rows and columns `p` and `q`.
fn swap_index(a: &mut [u64], m: usize, p: usize, q: usize) {
    for c in 0..m {
        a.swap(p * m + c, q * m + c);
    }
    for r in 0..m {
        a.swap(r * m + p, r * m + q);
    }
}

/// Solves `a x = b` for square `a` (row-major, destroyed). `None` if singular.
pub fn solve(a: &mut [u64], m: usize, mut b: Vec<u64>) -> Option<Vec<u64>> {
    // Division-free elimination to upper triangular form.
    for col in 0..m {
        let piv = (col..m).find(|&r| a[r * m + col] != 0)?;
        if piv != col {
            for c in 0..m {
                a.swap(piv * m + c, col * m + c);
            }
            b.swap(piv, col);
        }
        let p = a[col * m + col];
        for r in col + 1..m {
            let f = a[r * m + col];
            if f == 0 {
                continue;
            }
            for c in col..m {
                a[r * m + c] = sub(mul(p, a[r * m + c]), mul(f, a[col * m + c]));
            }
            b[r] = sub(mul(p, b[r]), mul(f, b[col]));
        }
    }
    // Invert all diagonal entries with one inversion.
    let mut prefix = vec![1u64; m + 1];
    for i in 0..m {
        prefix[i + 1] = mul(prefix[i], a[i * m + i]);
    }
    let mut acc = inv(prefix[m]);
    let mut diag_inv = vec![0u64; m];
    for i in (0..m).rev() {
        diag_inv[i] = mul(acc, prefix[i]);
        acc = mul(acc, a[i * m + i]);
    }
    for r in (0..m).rev() {
        let mut v = b[r];
        for c in r + 1..m {
            v = sub(v, mul(a[r * m + c], b[c]));
        }
        b[r] = mul(v, diag_inv[r]);
    }
    Some(b)
}

/// Inverse of the Vandermonde matrix on the nodes `1, 2, ..., d + 1`:
/// row `e` maps sampled values to the coefficient of `x^e`.
pub fn vandermonde_inverse(d: usize) -> Vec<Vec<u64>> {
    let m = d + 1;
    let mut a = vec![0u64; m * m];
    let mut id = vec![0u64; m * m];
    for r in 0..m {
        let x = r as u64 + 1;
        let mut p = 1;
        for c in 0..m {
            a[r * m + c] = p;
            p = mul(p, x);
        }
        id[r * m + r] = 1;
    }
    // Gauss-Jordan on [V | I]; V is invertible since the nodes are distinct.
    for col in 0..m {
        let piv = (col..m).find(|&r| a[r * m + col] != 0).expect("distinct nodes");
        for c in 0..m {
            a.swap(piv * m + c, col * m + c);
            id.swap(piv * m + c, col * m + c);
        }
        let pinv = inv(a[col * m + col]);
        for c in 0..m {
            a[col * m + c] = mul(a[col * m + c], pinv);
            id[col * m + c] = mul(id[col * m + c], pinv);
        }
        for r in 0..m {
            let f = a[r * m + col];
            if r == col || f == 0 {
                continue;
            }
            for c in 0..m {
                a[r * m + c] = sub(a[r * m + c], mul(f, a[col * m + c]));
                id[r * m + c] = sub(id[r * m + c], mul(f, id[col * m + c]));
            }
        }
    }
    (0..m).map(|r| id[r * m..(r + 1) * m].to_vec()).collect()
}

/// Mixed-radix layout of a grid with extents `dims[i] + 1`, axis 0 slowest.
#[derive(Clone, Debug)]
pub struct Grid {
    pub dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(dims: &[usize]) -> Option<Self> {
        let mut strides = vec![0; dims.len()];
        let mut len: usize = 1;
        for i in (0..dims.len()).rev() {
            strides[i] = len;
            len = len.checked_mul(dims[i] + 1)?;
        }
        Some(Grid { dims: dims.to_vec(), strides, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self, w: &[usize]) -> usize {
        w.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let c = idx / s;
                idx %= s;
                c
            })
            .collect()
    }

    pub fn contains(&self, w: &[usize]) -> bool {
        w.len() == self.dims.len() && w.iter().zip(&self.dims).all(|(a, d)| a <= d)
    }
}

/// Turns values sampled on the grid (node `j` on each axis is `j + 1`) into
/// monomial coefficients, in place.
pub fn interpolate(values: &mut [u64], grid: &Grid, tables: &[Vec<Vec<u64>>]) {
    let mut line = Vec::new();
    for (axis, table) in tables.iter().enumerate() {
        let m = grid.dims[axis] + 1;
        let stride = grid.strides[axis];
        for base in 0..grid.len() {
            if (base / stride) % m != 0 {
                continue;
            }
            line.clear();
            line.extend((0..m).map(|j| values[base + j * stride]));
            for (e, row) in table.iter().enumerate() {
                let mut acc = 0;
                for (coef, v) in row.iter().zip(&line) {
                    acc = add(acc, mul(*coef, *v));
                }
                values[base + e * stride] = acc;
            }
        }
    }
}

/// A single monomial coefficient from grid samples.
pub fn coefficient(values: &[u64], grid: &Grid, tables: &[Vec<Vec<u64>>], w: &[usize]) -> u64 {
    if !grid.contains(w) {
        return 0;
    }
    let mut acc = 0;
    for (idx, &v) in values.iter().enumerate() {
        if v == 0 {
            continue;
        }
        let mut f = v;
        for (axis, c) in grid.coords(idx).into_iter().enumerate() {
            f = mul(f, tables[axis][w[axis]][c]);
        }
        acc = add(acc, f);
    }
    acc
}
