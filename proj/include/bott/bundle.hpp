#pragma once

#include <string>
#include <vector>

namespace bott {

enum class Structure { Line, TangentOfFactor, FullTangent };

// Homogeneous bundle on P^{m_0} (x P^{m_1}).
struct BundleSpec {
    std::vector<int> factors;
    std::vector<int> twist;
    Structure structure = Structure::Line;
    int tangent_factor = -1;  // for TangentOfFactor

    static BundleSpec line(std::vector<int> factors, std::vector<int> twist);
    static BundleSpec tangent_of(std::vector<int> factors, std::vector<int> twist, int factor);
    static BundleSpec full_tangent(std::vector<int> factors, std::vector<int> twist);

    void validate() const;  // throws std::invalid_argument
    int total_dim() const;
    std::string describe() const;
    bool operator==(const BundleSpec&) const = default;
};

enum class Source { ClosedForm, Oracle };

struct CohomologyTable {
    BundleSpec bundle;
    std::vector<long> dims;  // index q = 0..total_dim
    Source source = Source::ClosedForm;

    long at(int q) const { return (q < 0 || q >= static_cast<int>(dims.size())) ? 0 : dims[q]; }
};

}  // namespace bott
