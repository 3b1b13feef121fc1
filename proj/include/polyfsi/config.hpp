#pragma once

#include <map>
#include <string>
#include <vector>

#include "polyfsi/errors.hpp"

namespace polyfsi {

/// One registered configuration key with default, documentation and numeric range.
struct ConfigKeySpec {
    std::string key;      // "section.name"
    std::string def;      // default value as text
    std::string doc;      // one-line help text
    bool numeric;         // numeric keys get range validation
    double lo, hi;        // inclusive range for numeric keys
    std::string choices;  // for string keys: "a|b|c" or "" for free-form
};

/// Flat sectioned key=value run configuration.
///
/// Every tunable of the solvers lives here; unknown keys are rejected and
/// numeric values are range-checked at assignment time.
class RunConfig {
   public:
    RunConfig();  // all defaults

    static const std::vector<ConfigKeySpec>& registry();

    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    double get_d(const std::string& key) const;
    int get_i(const std::string& key) const;
    bool get_b(const std::string& key) const;
    const std::string& get_s(const std::string& key) const;

    /// Parse a sectioned key=value file ([section] headers, # comments).
    void load_file(const std::string& path);
    void load_text(const std::string& text, const std::string& origin);

    /// Deterministic serialization in registry order.
    std::string dump() const;

    /// Help text listing every key, default and doc line.
    static std::string help_text();

   private:
    std::map<std::string, std::string> values_;
};

}  // namespace polyfsi
