#include "viltwin/twin/gru.hpp"

#include "viltwin/core/error.hpp"

namespace viltwin::twin {

namespace {

Matrix sigmoid(const Matrix& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ValidationError(std::string("GRU block ") + name + " has shape " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    }
    if (!m.allFinite()) throw ValidationError(std::string("GRU block ") + name + " holds non-finite values");
}

}  // namespace

GruCellParams GruCellParams::zeros(int input_size, int hidden_size) {
    GruCellParams p;
    for (Matrix* w : {&p.w_z, &p.w_r, &p.w_h}) *w = Matrix::Zero(hidden_size, input_size);
    for (Matrix* u : {&p.u_z, &p.u_r, &p.u_h}) *u = Matrix::Zero(hidden_size, hidden_size);
    for (Vector* b : {&p.b_z, &p.b_r, &p.b_h}) *b = Vector::Zero(hidden_size);
    return p;
}

void GruCellParams::validate() const {
    const auto hidden = w_z.rows();
    const auto input = w_z.cols();
    if (hidden < 1 || input < 1) throw ValidationError("GRU sizes must be positive");
    check_shape(w_z, hidden, input, "w_z");
    check_shape(w_r, hidden, input, "w_r");
    check_shape(w_h, hidden, input, "w_h");
    check_shape(u_z, hidden, hidden, "u_z");
    check_shape(u_r, hidden, hidden, "u_r");
    check_shape(u_h, hidden, hidden, "u_h");
    check_shape(b_z, hidden, 1, "b_z");
    check_shape(b_r, hidden, 1, "b_r");
    check_shape(b_h, hidden, 1, "b_h");
}

Matrix gru_forward(const GruCellParams& p, const Matrix& x, const Matrix& h, GruCache* cache) {
    if (x.rows() != p.w_z.cols() || h.rows() != p.w_z.rows() || x.cols() != h.cols()) {
        throw ValidationError("GRU input/hidden dimensions do not match the cell");
    }
    Matrix z = sigmoid((p.w_z * x + p.u_z * h).colwise() + p.b_z);
    Matrix r = sigmoid((p.w_r * x + p.u_r * h).colwise() + p.b_r);
    const Matrix rh = r.cwiseProduct(h);
    Matrix h_cand = ((p.w_h * x + p.u_h * rh).colwise() + p.b_h).array().tanh().matrix();
    Matrix h_next = h + z.cwiseProduct(h_cand - h);
    if (cache) {
        cache->x = x;
        cache->h = h;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->h_cand = std::move(h_cand);
    }
    return h_next;
}

Vector gru_cell(const GruCellParams& params, const Vector& x, const Vector& h) {
    return gru_forward(params, x, h, nullptr).col(0);
}

Matrix gru_backward(const GruCellParams& p, const GruCache& c, const Matrix& dh_next, GruCellParams& g, Matrix* dx) {
    const auto& z = c.z.array();
    const auto& r = c.r.array();
    const auto& hc = c.h_cand.array();
    const auto& h = c.h.array();
    const auto& dhn = dh_next.array();

    const Matrix da_h = (dhn * z * (1.0 - hc.square())).matrix();
    const Matrix da_z = (dhn * (hc - h) * z * (1.0 - z)).matrix();
    const Matrix rh = (r * h).matrix();
    const Matrix d_rh = p.u_h.transpose() * da_h;
    const Matrix da_r = (d_rh.array() * h * r * (1.0 - r)).matrix();

    g.w_h.noalias() += da_h * c.x.transpose();
    g.u_h.noalias() += da_h * rh.transpose();
    g.b_h += da_h.rowwise().sum();
    g.w_r.noalias() += da_r * c.x.transpose();
    g.u_r.noalias() += da_r * c.h.transpose();
    g.b_r += da_r.rowwise().sum();
    g.w_z.noalias() += da_z * c.x.transpose();
    g.u_z.noalias() += da_z * c.h.transpose();
    g.b_z += da_z.rowwise().sum();

    if (dx) {
        dx->noalias() = p.w_h.transpose() * da_h;
        dx->noalias() += p.w_r.transpose() * da_r;
        dx->noalias() += p.w_z.transpose() * da_z;
    }
    Matrix dh = (dhn * (1.0 - z)).matrix();
    dh.array() += d_rh.array() * r;
    dh.noalias() += p.u_r.transpose() * da_r;
    dh.noalias() += p.u_z.transpose() * da_z;
    return dh;
}

}  // namespace viltwin::twin
