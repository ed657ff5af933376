#pragma once

// Canonical JSON emission for reports: object keys sorted, doubles printed
// with 17 significant digits, infinities and NaN as the strings "inf",
// "-inf", "nan". Identical inputs serialize to identical bytes.

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace tiltcheck::json {

class Value {
public:
    Value() : kind_(Kind::Null) {}
    Value(bool b) : kind_(Kind::Bool), bool_(b) {}
    Value(double d) : kind_(Kind::Double), num_(d) {}
    Value(int i) : kind_(Kind::Int), int_(i) {}
    Value(long i) : kind_(Kind::Int), int_(i) {}
    Value(const char* s) : kind_(Kind::String), str_(s) {}
    Value(std::string s) : kind_(Kind::String), str_(std::move(s)) {}

    static Value array();
    static Value object();
    template <typename It>
    static Value number_array(It begin, It end) {
        Value v = array();
        for (It it = begin; it != end; ++it) v.push_back(Value(static_cast<double>(*it)));
        return v;
    }

    bool is_object() const { return kind_ == Kind::Object; }
    Value& operator[](const std::string& key);  // object insertion/access
    void push_back(Value v);                    // array append

    std::string dump() const;  // canonical, no whitespace
    std::string pretty() const;

private:
    enum class Kind { Null, Bool, Int, Double, String, Array, Object };
    Kind kind_;
    bool bool_ = false;
    double num_ = 0.0;
    long int_ = 0;
    std::string str_;
    std::vector<Value> arr_;
    std::map<std::string, Value> obj_;  // std::map keeps keys sorted

    void write(std::string& out, int indent, int depth) const;
};

std::string format_double(double v);

}  // namespace tiltcheck::json
