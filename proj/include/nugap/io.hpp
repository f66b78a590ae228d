#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "mtdc/system.hpp"
#include "rational.hpp"

namespace nugap {

using json = nlohmann::json;

// {"num": [...], "den": [...]}, ascending powers of s.
inline RationalFunction rational_from_json(const json& j) {
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw ModelError("transfer function needs fields \"num\" and \"den\"");
    auto coeffs = [](const json& a, const char* field) {
        if (!a.is_array() || a.empty()) throw ModelError(std::string("\"") + field + "\" must be a non-empty array");
        std::vector<double> c;
        for (const json& x : a) {
            if (!x.is_number()) throw ModelError(std::string("\"") + field + "\" holds a non-number");
            c.push_back(x.get<double>());
        }
        return Polynomial(std::move(c));
    };
    Polynomial den = coeffs(j.at("den"), "den");
    if (den.is_zero()) throw ModelError("\"den\" is the zero polynomial");
    return RationalFunction(coeffs(j.at("num"), "num"), den);
}

inline json rational_to_json(const RationalFunction& g) {
    return json{{"num", g.num().coeffs()}, {"den", g.den().coeffs()}};
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ModelError(path + ": " + e.what());
    }
}

inline RationalFunction load_rational(const std::string& path) {
    try {
        return rational_from_json(read_json_file(path));
    } catch (const ModelError& e) {
        std::string what = e.what();
        if (what.rfind(path, 0) == 0) throw;
        throw ModelError(path + ": " + what);
    }
}

// Doubles are written with round-trip precision.
inline void save_rational(const std::string& path, const RationalFunction& g) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write " + path);
    out << rational_to_json(g).dump(2) << '\n';
}

namespace detail {

inline double number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ModelError(std::string("field \"") + key + "\" must be a number");
    return j.at(key).get<double>();
}

inline double required(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ModelError(where + ": missing field \"" + key + "\"");
    return number(j, key, 0.0);
}

}  // namespace detail

// System config. Layout:
//   base  {Sbase, Ubase, fbase, Udcbase}
//   vscs  [{name, P0, Q0, Udc0, Ut0, Us0, C, Xf, Xg, Cf, gains {kp1 ki1 kp2 ki2 kd kp6 ki6}}]
//   cables [{from, to, R, L}]   endpoints by VSC name
//   focus  name,  paths {J1: [..]}
//   options {blocks: droop_current|pll_phase, fe12: printed|index_consistent, g0u2: gdc|zero}
//   blocks  {name: {gin: tf, gdc: tf, kp0: x}}   optional per-VSC replacements
inline mtdc::MtdcSystem system_from_json(const json& j) {
    using namespace mtdc;
    MtdcSystem sys;
    if (!j.is_object()) throw ModelError("config must be an object");
    if (j.contains("base")) {
        const json& b = j.at("base");
        sys.base.Sbase = detail::number(b, "Sbase", sys.base.Sbase);
        sys.base.Ubase = detail::number(b, "Ubase", sys.base.Ubase);
        sys.base.fbase = detail::number(b, "fbase", sys.base.fbase);
        sys.base.Udcbase = detail::number(b, "Udcbase", sys.base.Udcbase);
        if (!(sys.base.fbase > 0.0)) throw ModelError("base.fbase must be positive");
    }
    if (!j.contains("vscs") || !j.at("vscs").is_array()) throw ModelError("config needs a \"vscs\" array");
    for (const json& v : j.at("vscs")) {
        VscParams p;
        if (!v.contains("name") || !v.at("name").is_string()) throw ModelError("every VSC needs a string \"name\"");
        p.name = v.at("name").get<std::string>();
        const std::string where = "VSC " + p.name;
        for (const VscParams& q : sys.vscs)
            if (q.name == p.name) throw ModelError("duplicate VSC name '" + p.name + "'");
        p.op.P0 = detail::required(v, "P0", where);
        p.op.Q0 = detail::number(v, "Q0", 0.0);
        p.op.Udc0 = detail::number(v, "Udc0", 1.0);
        p.op.Ut0 = detail::number(v, "Ut0", 1.0);
        p.op.Us0 = detail::number(v, "Us0", 1.0);
        p.C = detail::required(v, "C", where);
        p.Xf = detail::required(v, "Xf", where);
        p.Xg = detail::required(v, "Xg", where);
        p.Cf = detail::number(v, "Cf", 0.0);
        if (!v.contains("gains") || !v.at("gains").is_object()) throw ModelError(where + ": missing \"gains\"");
        const json& g = v.at("gains");
        for (auto it = g.begin(); it != g.end(); ++it) {
            double* slot = gain_ptr(p.gains, it.key());
            if (!slot) throw ModelError(where + ": unknown gain '" + it.key() + "'");
            if (!it.value().is_number()) throw ModelError(where + ": gain " + it.key() + " must be a number");
            *slot = it.value().get<double>();
        }
        for (auto name : kGainNames)
            if (!g.contains(std::string(name))) throw ModelError(where + ": missing gain " + std::string(name));
        sys.vscs.push_back(std::move(p));
    }
    if (j.contains("cables")) {
        for (const json& c : j.at("cables")) {
            Cable cb;
            if (!c.contains("from") || !c.contains("to")) throw ModelError("cable needs \"from\" and \"to\"");
            cb.from = sys.index_of(c.at("from").get<std::string>());
            cb.to = sys.index_of(c.at("to").get<std::string>());
            cb.R = detail::required(c, "R", "cable");
            cb.L = detail::required(c, "L", "cable");
            sys.cables.push_back(cb);
        }
    }
    if (j.contains("focus")) sys.focus = sys.index_of(j.at("focus").get<std::string>());
    if (j.contains("paths") && j.at("paths").contains("J1")) sys.j1 = j.at("paths").at("J1").get<std::vector<int>>();
    if (j.contains("options")) {
        const json& o = j.at("options");
        auto pick = [&](const char* key, const char* a, const char* b) -> int {
            if (!o.contains(key)) return -1;
            std::string v = o.at(key).get<std::string>();
            if (v == a) return 0;
            if (v == b) return 1;
            throw ModelError(std::string("options.") + key + ": expected " + a + " or " + b);
        };
        if (int k = pick("blocks", "droop_current", "pll_phase"); k >= 0)
            sys.options.blocks = k ? BlockModel::pll_phase : BlockModel::droop_current;
        if (int k = pick("fe12", "printed", "index_consistent"); k >= 0)
            sys.options.fe12 = k ? Fe12Form::index_consistent : Fe12Form::printed;
        if (int k = pick("g0u2", "gdc", "zero"); k >= 0) sys.options.g0u2 = k ? G0U2Term::zero : G0U2Term::gdc;
    }
    if (j.contains("blocks")) {
        sys.overrides.resize(sys.vscs.size());
        const json& b = j.at("blocks");
        for (auto it = b.begin(); it != b.end(); ++it) {
            BlockOverride& o = sys.overrides[static_cast<std::size_t>(sys.index_of(it.key()))];
            if (it.value().contains("gin")) o.gin = rational_from_json(it.value().at("gin"));
            if (it.value().contains("gdc")) o.gdc = rational_from_json(it.value().at("gdc"));
            if (it.value().contains("kp0")) o.kp0 = it.value().at("kp0").get<double>();
        }
    }
    return sys;
}

inline mtdc::MtdcSystem load_system(const std::string& path) {
    try {
        mtdc::MtdcSystem sys = system_from_json(read_json_file(path));
        mtdc::validate(sys);
        return sys;
    } catch (const json::exception& e) {
        throw ModelError(path + ": " + e.what());
    } catch (const ModelError& e) {
        std::string what = e.what();
        if (what.rfind(path, 0) == 0) throw;
        throw ModelError(path + ": " + what);
    }
}

}  // namespace nugap
