#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gwasdl::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense double tensor with optional gradient and a record of the operation
/// that produced it. Copies share storage (handle semantics).
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t dim(std::size_t axis) const { return shape().at(axis); }
    std::size_t rank() const { return shape().size(); }
    std::size_t size() const;

    std::span<const double> values() const;
    std::span<double> mutable_values();
    /// Empty until a backward pass (or accumulate) touches this tensor.
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    bool has_grad() const;

    bool requires_grad() const;
    void set_requires_grad(bool value);
    void zero_grad();
    double item() const;

    /// True when produced by a recorded operation.
    bool has_history() const;

    struct Impl;
    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
    Impl& impl() const { return *impl_; }
    const std::shared_ptr<Impl>& handle() const { return impl_; }

private:
    std::shared_ptr<Impl> impl_;
};

struct Tensor::Impl {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Impl>> parents;
    // Propagates this node's grad into its parents' grads.
    std::function<void(Impl&)> backward;

    void ensure_grad() {
        if (grad.size() != value.size()) {
            grad.assign(value.size(), 0.0);
        }
    }
};

/// While alive, operations do not record history (inference mode).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

/// Reverse-mode sweep from a scalar. Leaf tensors that require grad
/// accumulate into their grad; intermediate grads are reset first.
/// Throws NoForwardRecorded when the root has no recorded history.
void backward(const Tensor& root, double seed = 1.0);

}  // namespace gwasdl::nn
