#include "kstar/json_io.hpp"

#include <fstream>
#include <utility>

namespace kstar::io {

namespace {

// nlohmann's type/key failures carry their own context strings; fold them
// into the one exception family the rest of the code understands.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

json index_to_json(const MultiIndex& m) {
    json arr = json::array();
    for (int i = 0; i < m.dim(); ++i) arr.push_back(m[i]);
    return arr;
}

MultiIndex index_from_json(const json& j, int dim) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ParseError("multi-index: expected an array of length " + std::to_string(dim));
    MultiIndex m(dim);
    for (int i = 0; i < dim; ++i) {
        int v = j[static_cast<std::size_t>(i)].get<int>();
        if (v < 0) throw ParseError("multi-index: negative exponent");
        m.at(i) = v;
    }
    return m;
}

Rational rational_from_json(const json& j) {
    return parse_rational(j.get<std::string>());
}

Model model_from_json(const json& j) {
    auto m = model_from_name(j.get<std::string>());
    if (!m) throw ParseError("unknown model name '" + j.get<std::string>() + "'");
    return *m;
}

}  // namespace

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": JSON parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
}

void save_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

json degree_to_json(int d) {
    if (d >= kInfDeg) return json("inf");
    return json(d);
}

int degree_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInfDeg;
        throw ParseError("degree: expected an integer or \"inf\"");
    }
    int d = guarded("degree", [&] { return j.get<int>(); });
    if (d < -1 || d >= kInfDeg) throw ParseError("degree out of range");
    return d;
}

json to_json(const QSeries& s) {
    json j;
    j["N"] = s.dim();
    j["Dz"] = degree_to_json(s.dz());
    j["Dzb"] = degree_to_json(s.dzb());
    json terms = json::array();
    for (const auto& [key, c] : s.terms()) {
        json t;
        t["m"] = index_to_json(key.first);
        t["k"] = index_to_json(key.second);
        t["c"] = to_pq_string(c);
        terms.push_back(std::move(t));
    }
    j["terms"] = std::move(terms);
    return j;
}

QSeries series_from_json(const json& j) {
    return guarded("series", [&] {
        int dim = j.at("N").get<int>();
        if (dim <= 0) throw ParseError("series: dimension must be positive");
        QSeries s(dim, degree_from_json(j.at("Dz")), degree_from_json(j.at("Dzb")));
        for (const auto& t : j.at("terms")) {
            MultiIndex m = index_from_json(t.at("m"), dim);
            MultiIndex k = index_from_json(t.at("k"), dim);
            s.add_term(m, k, rational_from_json(t.at("c")));
        }
        return s;
    });
}

json to_json(const FormalSeries& f) {
    json j;
    j["N"] = f.dim;
    j["order"] = f.order();
    json levels = json::array();
    for (int t = 0; t <= f.order(); ++t) levels.push_back(to_json(f.at(t)));
    j["levels"] = std::move(levels);
    return j;
}

FormalSeries formal_from_json(const json& j) {
    return guarded("formal series", [&] {
        int dim = j.at("N").get<int>();
        int order = j.at("order").get<int>();
        const json& levels = j.at("levels");
        if (order < 0 || static_cast<int>(levels.size()) != order + 1)
            throw ParseError("formal series: level count does not match the order");
        FormalSeries f(dim, order, 0, 0);
        for (int t = 0; t <= order; ++t) {
            QSeries level = series_from_json(levels[static_cast<std::size_t>(t)]);
            if (level.dim() != dim) throw ParseError("formal series: level dimension mismatch");
            f.at(t) = std::move(level);
        }
        return f;
    });
}

json to_json(const KahlerPotential& p, const std::optional<Rational>& hbar) {
    json j = to_json(p.phi);
    j["model"] = model_name(p.model);
    if (p.normalized) j["normalized"] = true;
    if (hbar) j["hbar"] = to_pq_string(*hbar);
    return j;
}

PotentialFile potential_from_json(const json& j) {
    return guarded("potential", [&] {
        QSeries phi = series_from_json(j);
        Model model = j.contains("model") ? model_from_json(j.at("model")) : Model::Custom;
        bool normalized = j.value("normalized", false);
        PotentialFile f{KahlerPotential{std::move(phi), model, normalized}, std::nullopt};
        if (j.contains("hbar")) f.hbar = rational_from_json(j.at("hbar"));
        return f;
    });
}

json to_json(const FockMatrix& A, Model model, const Rational& hbar) {
    json j;
    j["hbar"] = to_pq_string(hbar);
    j["model"] = model_name(model);
    j["N"] = A.dim;
    json entries = json::array();
    for (const auto& [key, c] : A.a) {
        json e;
        e["m"] = index_to_json(key.first);
        e["n"] = index_to_json(key.second);
        e["c"] = to_pq_string(c);
        entries.push_back(std::move(e));
    }
    j["entries"] = std::move(entries);
    j["certified"] = json::array({degree_to_json(A.cz), degree_to_json(A.czb)});
    return j;
}

FockMatrixFile fock_from_json(const json& j) {
    return guarded("fock matrix", [&] {
        FockMatrixFile f;
        f.hbar = rational_from_json(j.at("hbar"));
        f.model = model_from_json(j.at("model"));
        const json& cert = j.at("certified");
        if (!cert.is_array() || cert.size() != 2)
            throw ParseError("fock matrix: certified must be [dz, dzb]");
        const json& entries = j.at("entries");
        int dim = j.value("N", -1);
        for (const auto& e : entries) {
            if (!e.at("m").is_array()) throw ParseError("fock matrix: entry index must be array");
            if (dim < 0) dim = static_cast<int>(e.at("m").size());
            break;
        }
        if (dim <= 0) throw ParseError("fock matrix: cannot determine the dimension");
        f.A = FockMatrix(dim, degree_from_json(cert[0]), degree_from_json(cert[1]));
        for (const auto& e : entries) {
            MultiIndex m = index_from_json(e.at("m"), dim);
            MultiIndex n = index_from_json(e.at("n"), dim);
            Rational c = rational_from_json(e.at("c"));
            if (!f.A.certified_at(m, n))
                throw ParseError("fock matrix: entry outside its certified block");
            f.A.add(m, n, c);
        }
        return f;
    });
}

json to_json(const TransitionMatrix& T) {
    json j;
    j["N"] = T.dim;
    j["source_block"] = json::array({T.bm, T.bn});
    j["target_block"] = json::array({T.ai, T.aj});
    json entries = json::array();
    for (const auto& [key, v] : T.a) {
        json e;
        e["m"] = index_to_json(key.first.first);
        e["n"] = index_to_json(key.first.second);
        e["i"] = index_to_json(key.second.first);
        e["j"] = index_to_json(key.second.second);
        e["c"] = to_pq_string(v.c);
        e["radicand"] = to_pq_string(v.r);
        entries.push_back(std::move(e));
    }
    j["entries"] = std::move(entries);
    return j;
}

TransitionMatrix transition_from_json(const json& j) {
    return guarded("transition matrix", [&] {
        TransitionMatrix T;
        T.dim = j.at("N").get<int>();
        if (T.dim <= 0) throw ParseError("transition matrix: dimension must be positive");
        const json& src = j.at("source_block");
        const json& dst = j.at("target_block");
        if (!src.is_array() || src.size() != 2 || !dst.is_array() || dst.size() != 2)
            throw ParseError("transition matrix: blocks must be [row, col]");
        T.bm = src[0].get<int>();
        T.bn = src[1].get<int>();
        T.ai = dst[0].get<int>();
        T.aj = dst[1].get<int>();
        for (const auto& e : j.at("entries")) {
            TransitionMatrix::Key s{index_from_json(e.at("m"), T.dim),
                                    index_from_json(e.at("n"), T.dim)};
            TransitionMatrix::Key d{index_from_json(e.at("i"), T.dim),
                                    index_from_json(e.at("j"), T.dim)};
            T.add(s, d, SqrtRational(rational_from_json(e.at("c")),
                                     rational_from_json(e.at("radicand"))));
        }
        return T;
    });
}

json to_json(const PiRational& v) {
    json j;
    j["q"] = to_pq_string(v.q);
    j["pi_pow"] = v.pi_pow;
    return j;
}

PiRational pi_rational_from_json(const json& j) {
    return guarded("pi-rational", [&] {
        return PiRational(rational_from_json(j.at("q")), j.at("pi_pow").get<int>());
    });
}

}  // namespace kstar::io
