#pragma once

#include <Eigen/Dense>

namespace viltwin::twin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weights of one gated recurrent unit.
///
///   z  = sigmoid(Wz x + Uz h + bz)
///   r  = sigmoid(Wr x + Ur h + br)
///   h~ = tanh(Wh x + Uh (r * h) + bh)
///   h' = (1 - z) * h + z * h~
struct GruCellParams {
    Matrix w_z, u_z, w_r, u_r, w_h, u_h;  // W: hidden x input, U: hidden x hidden
    Vector b_z, b_r, b_h;

    static GruCellParams zeros(int input_size, int hidden_size);

    int input_size() const { return static_cast<int>(w_z.cols()); }
    int hidden_size() const { return static_cast<int>(w_z.rows()); }

    /// Throws ValidationError if the blocks disagree on sizes or hold
    /// non-finite values.
    void validate() const;

    /// Visits (name, tensor) for each weight block in a fixed order.
    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        f("w_z", self.w_z);
        f("u_z", self.u_z);
        f("b_z", self.b_z);
        f("w_r", self.w_r);
        f("u_r", self.u_r);
        f("b_r", self.b_r);
        f("w_h", self.w_h);
        f("u_h", self.u_h);
        f("b_h", self.b_h);
    }
};

/// Values a cell step keeps for backpropagation. Columns are batch entries.
struct GruCache {
    Matrix x, h, z, r, h_cand;
};

/// Single-vector step. Throws ValidationError on a dimension mismatch.
Vector gru_cell(const GruCellParams& params, const Vector& x, const Vector& h);

/// Batched step over the columns of `x` and `h`; fills `cache` when non-null.
Matrix gru_forward(const GruCellParams& params, const Matrix& x, const Matrix& h, GruCache* cache);

/// Backward through one batched step. Accumulates weight gradients into
/// `grad`, returns dL/dh and (when `dx` is non-null) writes dL/dx.
Matrix gru_backward(const GruCellParams& params, const GruCache& cache, const Matrix& dh_next, GruCellParams& grad,
                    Matrix* dx);

}  // namespace viltwin::twin
