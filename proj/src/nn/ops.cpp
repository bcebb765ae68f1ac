#include "gwasdl/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "gwasdl/error.hpp"

namespace gwasdl::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMatrix>;
using ConstMapRow = Eigen::Map<const RowMatrix>;

Tensor record(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
              std::function<void(Tensor::Impl&)> fn) {
    Tensor out = Tensor::from(std::move(shape), std::move(value));
    if (!grad_enabled()) {
        return out;
    }
    const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    if (!needs) {
        return out;
    }
    auto& impl = out.impl();
    impl.requires_grad = true;
    for (const auto& t : inputs) {
        impl.parents.push_back(t.handle());
    }
    impl.backward = std::move(fn);
    return out;
}

// Parent k's grad buffer if it takes gradients, else nullptr.
double* parent_grad(Tensor::Impl& out, std::size_t k) {
    auto& p = *out.parents[k];
    if (!p.requires_grad) {
        return nullptr;
    }
    p.ensure_grad();
    return p.grad.data();
}

void expect_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw Error(ErrorCode::ShapeMismatch, std::string(what) + " expects rank " + std::to_string(rank) +
                                                  ", got " + shape_string(t.shape()));
    }
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    expect_rank(x, 2, "affine input");
    expect_rank(weight, 2, "affine weight");
    const std::size_t n = x.dim(0);
    const std::size_t in = x.dim(1);
    const std::size_t out = weight.dim(0);
    if (weight.dim(1) != in || bias.size() != out) {
        throw Error(ErrorCode::ShapeMismatch, "affine: input " + shape_string(x.shape()) + " vs weight " +
                                                  shape_string(weight.shape()));
    }
    std::vector<double> y(n * out);
    {
        ConstMapRow X(x.values().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
        ConstMapRow W(weight.values().data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
        MapRow Y(y.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out));
        Y.noalias() = X * W.transpose();
        const Eigen::Map<const Eigen::RowVectorXd> b(bias.values().data(), static_cast<Eigen::Index>(out));
        Y.rowwise() += b;
    }
    return record({n, out}, std::move(y), {x, weight, bias}, [n, in, out](Tensor::Impl& self) {
        ConstMapRow dY(self.grad.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out));
        const auto& xv = self.parents[0]->value;
        const auto& wv = self.parents[1]->value;
        if (double* dx = parent_grad(self, 0)) {
            MapRow dX(dx, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
            ConstMapRow W(wv.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
            dX.noalias() += dY * W;
        }
        if (double* dw = parent_grad(self, 1)) {
            MapRow dW(dw, static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
            ConstMapRow X(xv.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(in));
            dW.noalias() += dY.transpose() * X;
        }
        if (double* db = parent_grad(self, 2)) {
            Eigen::Map<Eigen::RowVectorXd> dB(db, static_cast<Eigen::Index>(out));
            dB += dY.colwise().sum();
        }
    });
}

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
    if (kernel == 0 || stride == 0 || length < kernel) {
        throw Error(ErrorCode::ShapeMismatch, "conv1d: length " + std::to_string(length) +
                                                  " shorter than kernel " + std::to_string(kernel));
    }
    return (length - kernel) / stride + 1;
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride) {
    expect_rank(x, 3, "conv1d input");
    expect_rank(weight, 3, "conv1d weight");
    const std::size_t n = x.dim(0);
    const std::size_t cin = x.dim(1);
    const std::size_t len = x.dim(2);
    const std::size_t cout = weight.dim(0);
    const std::size_t k = weight.dim(2);
    if (weight.dim(1) != cin || bias.size() != cout) {
        throw Error(ErrorCode::ShapeMismatch, "conv1d: input " + shape_string(x.shape()) + " vs weight " +
                                                  shape_string(weight.shape()));
    }
    const std::size_t lout = conv1d_output_length(len, k, stride);
    const auto ck = static_cast<Eigen::Index>(cin * k);
    const auto lo = static_cast<Eigen::Index>(lout);

    // im2col per sample: cols (lout, cin*k), output (cout, lout) = W * cols^T.
    auto im2col = [=](const double* xs, RowMatrix& cols) {
        cols.resize(lo, ck);
        for (std::size_t t = 0; t < lout; ++t) {
            double* row = cols.data() + t * cin * k;
            for (std::size_t c = 0; c < cin; ++c) {
                const double* src = xs + c * len + t * stride;
                std::copy(src, src + k, row + c * k);
            }
        }
    };

    std::vector<double> y(n * cout * lout);
    {
        ConstMapRow W(weight.values().data(), static_cast<Eigen::Index>(cout), ck);
        RowMatrix cols;
        for (std::size_t s = 0; s < n; ++s) {
            im2col(x.values().data() + s * cin * len, cols);
            MapRow Y(y.data() + s * cout * lout, static_cast<Eigen::Index>(cout), lo);
            Y.noalias() = W * cols.transpose();
            for (std::size_t c = 0; c < cout; ++c) {
                Y.row(static_cast<Eigen::Index>(c)).array() += bias.values()[c];
            }
        }
    }
    return record({n, cout, lout}, std::move(y), {x, weight, bias},
                  [=](Tensor::Impl& self) {
                      const auto& xv = self.parents[0]->value;
                      const auto& wv = self.parents[1]->value;
                      double* dx = parent_grad(self, 0);
                      double* dw = parent_grad(self, 1);
                      double* db = parent_grad(self, 2);
                      ConstMapRow W(wv.data(), static_cast<Eigen::Index>(cout), ck);
                      RowMatrix cols;
                      RowMatrix dcols;
                      for (std::size_t s = 0; s < n; ++s) {
                          ConstMapRow dY(self.grad.data() + s * cout * lout, static_cast<Eigen::Index>(cout), lo);
                          if (dw != nullptr) {
                              im2col(xv.data() + s * cin * len, cols);
                              MapRow dW(dw, static_cast<Eigen::Index>(cout), ck);
                              dW.noalias() += dY * cols;
                          }
                          if (db != nullptr) {
                              for (std::size_t c = 0; c < cout; ++c) {
                                  db[c] += dY.row(static_cast<Eigen::Index>(c)).sum();
                              }
                          }
                          if (dx != nullptr) {
                              dcols.noalias() = dY.transpose() * W;
                              double* dxs = dx + s * cin * len;
                              for (std::size_t t = 0; t < lout; ++t) {
                                  const double* row = dcols.data() + t * cin * k;
                                  for (std::size_t c = 0; c < cin; ++c) {
                                      double* dst = dxs + c * len + t * stride;
                                      for (std::size_t q = 0; q < k; ++q) {
                                          dst[q] += row[c * k + q];
                                      }
                                  }
                              }
                          }
                      }
                  });
}

Tensor channel_mix(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (weight.rank() != 3 || weight.dim(0) != 1 || weight.dim(2) != 1) {
        throw Error(ErrorCode::ShapeMismatch, "channel_mix weight must be (1, C, 1)");
    }
    return conv1d(x, weight, bias, 1);
}

Tensor relu(const Tensor& x) {
    std::vector<double> y(x.values().begin(), x.values().end());
    for (double& v : y) {
        v = v > 0.0 ? v : 0.0;
    }
    return record(x.shape(), std::move(y), {x}, [](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        const auto& xv = self.parents[0]->value;
        for (std::size_t i = 0; i < xv.size(); ++i) {
            if (xv[i] > 0.0) {
                dx[i] += self.grad[i];
            }
        }
    });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = stable_sigmoid(x.values()[i]);
    }
    return record(x.shape(), y, {x}, [y](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < y.size(); ++i) {
            dx[i] += self.grad[i] * y[i] * (1.0 - y[i]);
        }
    });
}

namespace {

// Shared max-pool machinery: windows[i] = [begin, end) on the length axis.
Tensor windowed_max(const Tensor& x, const std::vector<std::pair<std::size_t, std::size_t>>& windows) {
    const std::size_t n = x.dim(0);
    const std::size_t c = x.dim(1);
    const std::size_t len = x.dim(2);
    const std::size_t lout = windows.size();
    std::vector<double> y(n * c * lout);
    std::vector<std::size_t> argmax(y.size());
    const auto& xv = x.values();
    for (std::size_t row = 0; row < n * c; ++row) {
        const double* src = xv.data() + row * len;
        for (std::size_t i = 0; i < lout; ++i) {
            std::size_t best = windows[i].first;
            for (std::size_t t = windows[i].first + 1; t < windows[i].second; ++t) {
                if (src[t] > src[best]) {
                    best = t;
                }
            }
            y[row * lout + i] = src[best];
            argmax[row * lout + i] = row * len + best;
        }
    }
    return record({n, c, lout}, std::move(y), {x}, [argmax = std::move(argmax)](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < argmax.size(); ++i) {
            dx[argmax[i]] += self.grad[i];
        }
    });
}

}  // namespace

Tensor max_pool1d(const Tensor& x, std::size_t kernel, std::size_t stride) {
    expect_rank(x, 3, "max_pool1d input");
    const std::size_t lout = conv1d_output_length(x.dim(2), kernel, stride);
    std::vector<std::pair<std::size_t, std::size_t>> windows(lout);
    for (std::size_t i = 0; i < lout; ++i) {
        windows[i] = {i * stride, i * stride + kernel};
    }
    return windowed_max(x, windows);
}

Tensor adaptive_max_pool1d(const Tensor& x, std::size_t out_len) {
    expect_rank(x, 3, "adaptive_max_pool1d input");
    const std::size_t len = x.dim(2);
    if (out_len == 0 || len == 0) {
        throw Error(ErrorCode::ShapeMismatch, "adaptive_max_pool1d needs non-empty input and output");
    }
    std::vector<std::pair<std::size_t, std::size_t>> windows(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const std::size_t begin = (i * len) / out_len;
        const std::size_t end = ((i + 1) * len + out_len - 1) / out_len;
        windows[i] = {begin, std::max(end, begin + 1)};
    }
    return windowed_max(x, windows);
}

Tensor dropout(const Tensor& x, double p, Rng& rng, bool training) {
    if (!training || p <= 0.0) {
        return x;
    }
    if (p >= 1.0) {
        throw Error(ErrorCode::ConfigInvalid, "dropout probability must be < 1");
    }
    const double keep_scale = 1.0 / (1.0 - p);
    std::vector<double> mask(x.size());
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
        y[i] = x.values()[i] * mask[i];
    }
    return record(x.shape(), std::move(y), {x}, [mask = std::move(mask)](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < mask.size(); ++i) {
            dx[i] += self.grad[i] * mask[i];
        }
    });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (numel(shape) != x.size()) {
        throw Error(ErrorCode::ShapeMismatch, "reshape " + shape_string(x.shape()) + " -> " + shape_string(shape));
    }
    std::vector<double> y(x.values().begin(), x.values().end());
    return record(std::move(shape), std::move(y), {x}, [](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            dx[i] += self.grad[i];
        }
    });
}

Tensor slice_last(const Tensor& x, std::size_t begin, std::size_t end) {
    if (x.rank() < 2 || x.rank() > 3) {
        throw Error(ErrorCode::ShapeMismatch, "slice_last expects rank 2 or 3");
    }
    const std::size_t len = x.shape().back();
    if (begin >= end || end > len) {
        throw Error(ErrorCode::ShapeMismatch, "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                                                  ") outside length " + std::to_string(len));
    }
    const std::size_t rows = x.size() / len;
    const std::size_t width = end - begin;
    std::vector<double> y(rows * width);
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(x.values().data() + r * len + begin, width, y.data() + r * width);
    }
    Shape shape = x.shape();
    shape.back() = width;
    return record(std::move(shape), std::move(y), {x}, [rows, len, begin, width](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t t = 0; t < width; ++t) {
                dx[r * len + begin + t] += self.grad[r * width + t];
            }
        }
    });
}

Tensor concat_features(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw Error(ErrorCode::ShapeMismatch, "concat of nothing");
    }
    const std::size_t n = parts[0].dim(0);
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const auto& p : parts) {
        expect_rank(p, 2, "concat_features part");
        if (p.dim(0) != n) {
            throw Error(ErrorCode::ShapeMismatch, "concat parts disagree on batch size");
        }
        widths.push_back(p.dim(1));
        total += p.dim(1);
    }
    std::vector<double> y(n * total);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        for (std::size_t r = 0; r < n; ++r) {
            std::copy_n(parts[k].values().data() + r * widths[k], widths[k], y.data() + r * total + offset);
        }
        offset += widths[k];
    }
    return record({n, total}, std::move(y), parts, [n, total, widths](Tensor::Impl& self) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
            if (double* dx = parent_grad(self, k)) {
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t t = 0; t < widths[k]; ++t) {
                        dx[r * widths[k] + t] += self.grad[r * total + off + t];
                    }
                }
            }
            off += widths[k];
        }
    });
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (const double v : x.values()) {
        s += v;
    }
    return record({1}, {s}, {x}, [](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        const std::size_t count = self.parents[0]->value.size();
        for (std::size_t i = 0; i < count; ++i) {
            dx[i] += self.grad[0];
        }
    });
}

Tensor scale(const Tensor& x, double factor) {
    std::vector<double> y(x.values().begin(), x.values().end());
    for (double& v : y) {
        v *= factor;
    }
    return record(x.shape(), std::move(y), {x}, [factor](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            dx[i] += factor * self.grad[i];
        }
    });
}

Tensor weighted_sum(const Tensor& x, std::span<const double> weights) {
    if (weights.size() != x.size()) {
        throw Error(ErrorCode::ShapeMismatch, "weighted_sum weights differ in size");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        s += weights[i] * x.values()[i];
    }
    std::vector<double> w(weights.begin(), weights.end());
    return record({1}, {s}, {x}, [w = std::move(w)](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            dx[i] += self.grad[0] * w[i];
        }
    });
}

double masked_bce_loss(std::span<const double> probabilities, std::span<const double> labels,
                       std::span<const std::uint8_t> mask) {
    if (probabilities.size() != labels.size() || labels.size() != mask.size()) {
        throw Error(ErrorCode::ShapeMismatch, "masked_bce_loss inputs differ in size");
    }
    double total = 0.0;
    std::size_t observed = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) {
            continue;
        }
        const double p = std::clamp(probabilities[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
        total -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
        ++observed;
    }
    if (observed == 0) {
        throw Error(ErrorCode::AllMissing, "every label cell is missing");
    }
    return total / static_cast<double>(observed);
}

Tensor masked_bce_with_logits(const Tensor& logits, std::span<const double> labels,
                              std::span<const std::uint8_t> mask) {
    if (logits.size() != labels.size() || labels.size() != mask.size()) {
        throw Error(ErrorCode::ShapeMismatch, "masked_bce: logits " + shape_string(logits.shape()) +
                                                  " vs " + std::to_string(labels.size()) + " labels");
    }
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = stable_sigmoid(logits.values()[i]);
    }
    const double loss = masked_bce_loss(p, labels, mask);
    std::size_t observed = 0;
    for (const auto m : mask) {
        observed += m ? 1 : 0;
    }
    // d loss / d logit = (p - y) / observed inside the clamp, 0 where clamped or masked.
    std::vector<double> dlogit(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (mask[i] && p[i] > kProbabilityClamp && p[i] < 1.0 - kProbabilityClamp) {
            dlogit[i] = (p[i] - labels[i]) / static_cast<double>(observed);
        }
    }
    return record({1}, {loss}, {logits}, [dlogit = std::move(dlogit)](Tensor::Impl& self) {
        double* dx = parent_grad(self, 0);
        if (dx == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < dlogit.size(); ++i) {
            dx[i] += self.grad[0] * dlogit[i];
        }
    });
}

}  // namespace gwasdl::nn
