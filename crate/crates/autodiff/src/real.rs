use num_traits::Float;

/// Scalar type of a graph: `f32` for training, `f64` for gradient checks.
pub trait Real: Float + std::iter::Sum + std::fmt::Debug + Default + Send + Sync + 'static {
    /// Tag stored in checkpoints.
    const DTYPE_TAG: u8;

    fn c(v: f64) -> Self;
    fn f64(self) -> f64;
    fn erf(self) -> Self;

    /// `C = A·B + beta·C` for row/column-strided matrices (m×k)(k×n).
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: &[Self],
        a_strides: (isize, isize),
        b: &[Self],
        b_strides: (isize, isize),
        beta: Self,
        c: &mut [Self],
        c_strides: (isize, isize),
    );
}

fn extent(rows: usize, cols: usize, (rs, cs): (isize, isize)) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    ((rows - 1) as isize * rs + (cols - 1) as isize * cs) as usize + 1
}

macro_rules! impl_real {
    ($t:ty, $tag:expr, $gemm:path, $erf:path) => {
        impl Real for $t {
            const DTYPE_TAG: u8 = $tag;

            #[inline]
            fn c(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn erf(self) -> Self {
                $erf(self)
            }

            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                a_strides: (isize, isize),
                b: &[Self],
                b_strides: (isize, isize),
                beta: Self,
                c: &mut [Self],
                c_strides: (isize, isize),
            ) {
                assert!(a_strides.0 >= 0 && a_strides.1 >= 0 && b_strides.0 >= 0 && b_strides.1 >= 0);
                assert!(extent(m, k, a_strides) <= a.len(), "gemm: A out of bounds");
                assert!(extent(k, n, b_strides) <= b.len(), "gemm: B out of bounds");
                assert!(extent(m, n, c_strides) <= c.len(), "gemm: C out of bounds");
                if m == 0 || n == 0 {
                    return;
                }
                // SAFETY: the asserts above bound every index the kernel touches.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        1.0,
                        a.as_ptr(),
                        a_strides.0,
                        a_strides.1,
                        b.as_ptr(),
                        b_strides.0,
                        b_strides.1,
                        beta,
                        c.as_mut_ptr(),
                        c_strides.0,
                        c_strides.1,
                    );
                }
            }
        }
    };
}

impl_real!(f32, 0, matrixmultiply::sgemm, libm::erff);
impl_real!(f64, 1, matrixmultiply::dgemm, libm::erf);
