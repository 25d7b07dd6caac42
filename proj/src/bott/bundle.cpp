#include "bott/bundle.hpp"

#include <sstream>
#include <stdexcept>

namespace bott {

BundleSpec BundleSpec::line(std::vector<int> factors, std::vector<int> twist)
{
    BundleSpec b{std::move(factors), std::move(twist), Structure::Line, -1};
    b.validate();
    return b;
}

BundleSpec BundleSpec::tangent_of(std::vector<int> factors, std::vector<int> twist, int factor)
{
    BundleSpec b{std::move(factors), std::move(twist), Structure::TangentOfFactor, factor};
    b.validate();
    return b;
}

BundleSpec BundleSpec::full_tangent(std::vector<int> factors, std::vector<int> twist)
{
    BundleSpec b{std::move(factors), std::move(twist), Structure::FullTangent, -1};
    b.validate();
    return b;
}

void BundleSpec::validate() const
{
    if (factors.empty() || factors.size() > 2) throw std::invalid_argument("bundle needs one or two factors");
    if (twist.size() != factors.size()) throw std::invalid_argument("twist length must match the factor count");
    for (int m : factors)
        if (m < 0 || m > 30) throw std::invalid_argument("factor dimension out of range");
    if (structure == Structure::TangentOfFactor) {
        if (tangent_factor < 0 || tangent_factor >= static_cast<int>(factors.size()))
            throw std::invalid_argument("tangent factor index out of range");
        if (factors[tangent_factor] < 1) throw std::invalid_argument("tangent of a point factor");
    }
}

int BundleSpec::total_dim() const
{
    int s = 0;
    for (int m : factors) s += m;
    return s;
}

std::string BundleSpec::describe() const
{
    std::ostringstream os;
    auto base = [&] {
        for (std::size_t i = 0; i < factors.size(); ++i) os << (i ? "xP" : "P") << factors[i];
    };
    switch (structure) {
    case Structure::Line: os << "O"; break;
    case Structure::TangentOfFactor: os << "T[P" << factors[tangent_factor] << "]"; break;
    case Structure::FullTangent: os << "T"; break;
    }
    os << "(";
    for (std::size_t i = 0; i < twist.size(); ++i) os << (i ? "," : "") << twist[i];
    os << ") on ";
    base();
    return os.str();
}

}  // namespace bott
