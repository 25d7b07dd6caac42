#include "crx/tensor.hpp"

#include <fstream>
#include <sstream>

namespace crx {

using nlohmann::json;

int weight_of_key(const Key& k) { return k.z.twist(); }

Cochain DeformationTensor::total() const
{
    Cochain out;
    for (const auto& [w, x] : coeffs) out = add(out, x);
    return out;
}

DeformationTensor DeformationTensor::from_cochain(int n, const Cochain& x)
{
    DeformationTensor t;
    t.n = n;
    for (const auto& [k, c] : x) t.coeffs[weight_of_key(k)].emplace(k, c);
    return t;
}

namespace {

json integer_json(const Integer& z)
{
    if (z.fits_slong_p()) return z.get_si();
    return z.get_str();
}

Integer integer_from_json(const json& j, const std::string& where)
{
    if (j.is_number_unsigned()) return Integer(std::to_string(j.get<unsigned long long>()));
    if (j.is_number_integer()) return Integer(std::to_string(j.get<long long>()));
    if (j.is_string()) {
        Integer z;
        if (z.set_str(j.get<std::string>(), 10) != 0) throw FormatError(where + ": not an integer string");
        return z;
    }
    throw FormatError(where + ": expected an integer");
}

}  // namespace

json scalar_json(const Scalar& s) { return {{"num", integer_json(s.get_num())}, {"den", integer_json(s.get_den())}}; }

Scalar scalar_from_json(const json& num, const json& den, const std::string& where)
{
    Integer p = integer_from_json(num, where + "/num"), q = integer_from_json(den, where + "/den");
    if (sgn(q) <= 0) throw FormatError(where + "/den: denominator must be positive");
    Scalar s(p, q);
    s.canonicalize();
    return s;
}

json to_json(const DeformationTensor& t)
{
    json entries = json::array();
    for (const auto& [w, x] : t.coeffs)
        for (const auto& [k, c] : x) {
            json e = scalar_json(c);
            e["weight"] = w;
            e["basis"] = label(k);
            entries.push_back(e);
        }
    return {{"schema_version", kSchemaVersion}, {"kind", "deformation_tensor"}, {"n", t.n}, {"entries", entries}};
}

DeformationTensor tensor_from_json(const json& j)
{
    if (!j.is_object()) throw FormatError("/: expected an object");
    if (!j.contains("schema_version")) throw FormatError("/schema_version: missing");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
        throw FormatError("/schema_version: unsupported (expected " + std::to_string(kSchemaVersion) + ")");
    if (!j.contains("n") || !j["n"].is_number_integer()) throw FormatError("/n: missing or not an integer");
    DeformationTensor t;
    t.n = j["n"].get<int>();
    if (t.n < 2 || t.n - 2 >= kMaxCoords) throw FormatError("/n: out of range [2, " + std::to_string(kMaxCoords + 1) + "]");
    if (!j.contains("entries") || !j["entries"].is_array()) throw FormatError("/entries: missing or not an array");
    const auto& es = j["entries"];
    for (std::size_t i = 0; i < es.size(); ++i) {
        const std::string where = "/entries/" + std::to_string(i);
        const json& e = es[i];
        if (!e.is_object()) throw FormatError(where + ": expected an object");
        for (const char* f : {"weight", "basis", "num", "den"})
            if (!e.contains(f)) throw FormatError(where + "/" + f + ": missing");
        if (!e["weight"].is_number_integer()) throw FormatError(where + "/weight: expected an integer");
        if (!e["basis"].is_string()) throw FormatError(where + "/basis: expected a string");
        const int w = e["weight"].get<int>();
        Key k;
        try {
            k = parse_label(e["basis"].get<std::string>(), t.n - 2);
        } catch (const std::exception& ex) {
            throw FormatError(where + "/basis: " + ex.what());
        }
        if (k.degree() != 1 || (k.z.v >= 0) == (k.y.v >= 0))
            throw FormatError(where + "/basis: expected a vector-valued 1-form (exactly one vector index)");
        if (weight_of_key(k) != w || k.y.twist() != -w)
            throw FormatError(where + "/basis: twist (" + std::to_string(k.z.twist()) + "," + std::to_string(k.y.twist()) +
                              ") does not match weight " + std::to_string(w));
        Scalar c = scalar_from_json(e["num"], e["den"], where);
        auto& x = t.coeffs[w];
        if (x.count(k)) throw FormatError(where + "/basis: duplicate entry");
        if (sgn(c) != 0) x.emplace(k, c);
        if (x.empty()) t.coeffs.erase(w);
    }
    return t;
}

DeformationTensor parse_tensor(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw FormatError("byte " + std::to_string(ex.byte) + ": " + ex.what());
    }
    return tensor_from_json(j);
}

DeformationTensor read_tensor_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_tensor(ss.str());
    } catch (const FormatError& ex) {
        throw FormatError(path + ": " + ex.what());
    }
}

}  // namespace crx
