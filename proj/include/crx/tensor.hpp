#pragma once

#include "crx/terms.hpp"

#include <json.hpp>

#include <map>
#include <stdexcept>
#include <string>

namespace crx {

constexpr int kSchemaVersion = 1;

// A finitely supported family of weight-k cochains in the ambient degree-1 model.
struct DeformationTensor {
    int n = 0;
    std::map<int, Cochain> coeffs;

    bool empty() const { return coeffs.empty(); }
    Cochain total() const;
    static DeformationTensor from_cochain(int n, const Cochain& x);  // groups terms by weight
};

// Malformed input; the message names the offending JSON location.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int weight_of_key(const Key& k);  // twist of the P^1 factor

nlohmann::json to_json(const DeformationTensor& t);
DeformationTensor tensor_from_json(const nlohmann::json& j);
DeformationTensor parse_tensor(const std::string& text);
DeformationTensor read_tensor_file(const std::string& path);

nlohmann::json scalar_json(const Scalar& s);  // {"num": .., "den": ..} fields
Scalar scalar_from_json(const nlohmann::json& num, const nlohmann::json& den, const std::string& where);

}  // namespace crx
