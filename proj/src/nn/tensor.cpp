#include "gwasdl/nn/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "gwasdl/error.hpp"

namespace gwasdl::nn {

namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (const auto d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? ", " : "") << shape[i];
    }
    out << ')';
    return out.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto impl = std::make_shared<Impl>();
    impl->value.assign(numel(shape), 0.0);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    if (numel(shape) != values.size()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "shape " + shape_string(shape) + " needs " + std::to_string(numel(shape)) + " values");
    }
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->value = std::move(values);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::size() const { return impl_->value.size(); }
std::span<const double> Tensor::values() const { return impl_->value; }
std::span<double> Tensor::mutable_values() { return impl_->value; }
std::span<const double> Tensor::grad() const { return impl_->grad; }
std::span<double> Tensor::mutable_grad() {
    impl_->ensure_grad();
    return impl_->grad;
}
bool Tensor::has_grad() const { return impl_->grad.size() == impl_->value.size() && !impl_->value.empty(); }
bool Tensor::requires_grad() const { return impl_->requires_grad; }
void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }
void Tensor::zero_grad() { impl_->grad.assign(impl_->value.size(), 0.0); }
bool Tensor::has_history() const { return static_cast<bool>(impl_->backward); }

double Tensor::item() const {
    if (size() != 1) {
        throw Error(ErrorCode::ShapeMismatch, "item() on tensor of shape " + shape_string(shape()));
    }
    return impl_->value[0];
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

void backward(const Tensor& root, double seed) {
    if (!root.defined() || !root.has_history()) {
        throw Error(ErrorCode::NoForwardRecorded, "backward() on a tensor without recorded history");
    }
    if (root.size() != 1) {
        throw Error(ErrorCode::ShapeMismatch, "backward() needs a scalar, got " + shape_string(root.shape()));
    }
    // Iterative post-order DFS gives a topological order.
    std::vector<Tensor::Impl*> order;
    std::unordered_set<Tensor::Impl*> visited;
    std::vector<std::pair<Tensor::Impl*, std::size_t>> stack{{&root.impl(), 0}};
    visited.insert(&root.impl());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor::Impl* parent = node->parents[next++].get();
            if (visited.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (auto* node : order) {
        if (node->backward) {
            node->grad.assign(node->value.size(), 0.0);
        } else if (node->requires_grad) {
            node->ensure_grad();
        }
    }
    root.impl().grad[0] = seed;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward) {
            (*it)->backward(**it);
        }
    }
}

}  // namespace gwasdl::nn
