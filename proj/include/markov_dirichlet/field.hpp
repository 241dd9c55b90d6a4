#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"

namespace mdir {

/// Complex-valued function on the points of one domain.
class ScalarField {
public:
    explicit ScalarField(DomainPtr domain) : domain_(std::move(domain)), values_(domain_->size()) {}

    ScalarField(DomainPtr domain, std::vector<Complex> values)
        : domain_(std::move(domain)), values_(std::move(values)) {
        if (values_.size() != domain_->size())
            throw input_error("field has " + std::to_string(values_.size()) + " values for a domain of " +
                              std::to_string(domain_->size()) + " points");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
                throw input_error("field value at point " + std::to_string(i) + " is not finite");
    }

    static ScalarField constant(DomainPtr domain, Complex c) {
        const std::size_t n = domain->size();
        return ScalarField(std::move(domain), std::vector<Complex>(n, c));
    }

    static ScalarField from_real(DomainPtr domain, std::span<const double> values) {
        return ScalarField(std::move(domain), std::vector<Complex>(values.begin(), values.end()));
    }

    template <typename Fn>
    static ScalarField from_function(DomainPtr domain, Fn&& fn) {
        std::vector<Complex> v(domain->size());
        for (Index i = 0; i < v.size(); ++i) v[i] = Complex(fn(domain->coords(i)));
        return ScalarField(std::move(domain), std::move(v));
    }

    std::size_t size() const { return values_.size(); }
    Complex operator[](std::size_t i) const { return values_[i]; }
    Complex& operator[](std::size_t i) { return values_[i]; }
    std::span<const Complex> values() const { return values_; }
    std::span<Complex> values() { return values_; }
    const DiscreteDomain& domain() const { return *domain_; }
    const DomainPtr& domain_ptr() const { return domain_; }

    bool same_domain(const ScalarField& other) const { return domain_ == other.domain_; }

    bool is_real() const {
        return std::all_of(values_.begin(), values_.end(), [](Complex z) { return z.imag() == 0.0; });
    }

    ScalarField& operator+=(const ScalarField& o) {
        require_same(o);
        for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        require_same(o);
        for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    ScalarField& operator*=(Complex c) {
        for (auto& v : values_) v *= c;
        return *this;
    }

    void require_same(const ScalarField& o) const {
        if (!same_domain(o)) throw input_error("fields live on different domains");
    }

private:
    DomainPtr domain_;
    std::vector<Complex> values_;
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(Complex c, ScalarField a) { return a *= c; }

/// Pointwise product.
inline ScalarField product(const ScalarField& a, const ScalarField& b) {
    a.require_same(b);
    ScalarField out(a.domain_ptr());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

/// Pointwise squared modulus |f|^2 (a real field).
inline ScalarField squared_modulus(const ScalarField& f) {
    ScalarField out(f.domain_ptr());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::norm(f[i]);
    return out;
}

inline ScalarField conj(const ScalarField& f) {
    ScalarField out(f.domain_ptr());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::conj(f[i]);
    return out;
}

inline double sup_norm(std::span<const Complex> v) {
    double m = 0.0;
    for (Complex z : v) m = std::max(m, std::abs(z));
    return m;
}

inline double sup_norm(const ScalarField& f) { return sup_norm(f.values()); }

inline double sup_distance(const ScalarField& a, const ScalarField& b) {
    a.require_same(b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Values on the boundary, keyed by point id.
using BoundaryData = std::map<Index, Complex>;

inline BoundaryData restrict_boundary(const ScalarField& f) {
    BoundaryData out;
    for (Index b : f.domain().boundary_ids()) out.emplace_hint(out.end(), b, f[b]);
    return out;
}

inline bool is_constant(const BoundaryData& data) {
    if (data.empty()) return true;
    const Complex first = data.begin()->second;
    return std::all_of(data.begin(), data.end(), [&](const auto& kv) { return kv.second == first; });
}

/// How interior values are seeded when extending boundary data to K.
struct ExtensionMode {
    enum class Kind { zero_fill, nearest_boundary, constant };
    Kind kind = Kind::zero_fill;
    Complex value{};

    static ExtensionMode zero_fill() { return {Kind::zero_fill, {}}; }
    static ExtensionMode nearest_boundary() { return {Kind::nearest_boundary, {}}; }
    static ExtensionMode constant(Complex c) { return {Kind::constant, c}; }

    std::string name() const {
        switch (kind) {
        case Kind::zero_fill: return "zero-fill";
        case Kind::nearest_boundary: return "nearest-boundary";
        case Kind::constant: return "constant";
        }
        return "zero-fill";
    }
};

inline ScalarField extend_boundary(const BoundaryData& data, const DomainPtr& domain, ExtensionMode mode) {
    const auto& d = *domain;
    std::vector<Complex> v(d.size(), mode.kind == ExtensionMode::Kind::constant ? mode.value : Complex{});
    for (Index b : d.boundary_ids()) {
        auto it = data.find(b);
        if (it == data.end()) throw input_error("boundary data is missing boundary id " + std::to_string(b));
        v[b] = it->second;
    }
    for (const auto& [id, value] : data) {
        if (id >= d.size() || !d.is_boundary(id))
            throw input_error("boundary data has a value for non-boundary id " + std::to_string(id));
    }
    if (mode.kind == ExtensionMode::Kind::nearest_boundary)
        for (Index i : d.interior_ids()) v[i] = v[d.nearest_boundary(i)];
    return ScalarField(domain, std::move(v));
}

} // namespace mdir
