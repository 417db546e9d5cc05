#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "kstar/charts.hpp"
#include "kstar/fock.hpp"
#include "kstar/trace.hpp"

namespace kstar::io {

using json = nlohmann::ordered_json;

// Parse with errors rethrown as ParseError carrying the byte offset.
json parse(const std::string& text);
json load_file(const std::string& path);
void save_file(const std::string& path, const json& j);

// Degrees serialize as plain integers, with the certified-everywhere
// sentinel spelled "inf" so no magic constant leaks into files.
json degree_to_json(int d);
int degree_from_json(const json& j);

// {"N":int, "Dz":int|"inf", "Dzb":int|"inf",
//  "terms":[{"m":[..], "k":[..], "c":"p/q"}...]}
json to_json(const QSeries& s);
QSeries series_from_json(const json& j);

// series object with the parameter grading kept level by level:
// {"N":int, "order":int, "levels":[series...]}
json to_json(const FormalSeries& f);
FormalSeries formal_from_json(const json& j);

// series keys plus {"model":"...", "hbar":"p/q"?} metadata
struct PotentialFile {
    KahlerPotential p;
    std::optional<Rational> hbar;
};
json to_json(const KahlerPotential& p, const std::optional<Rational>& hbar = std::nullopt);
PotentialFile potential_from_json(const json& j);

// {"hbar":"p/q", "model":"...",
//  "entries":[{"m":[..], "n":[..], "c":"p/q"}...], "certified":[dz, dzb]}
struct FockMatrixFile {
    FockMatrix A;
    Model model = Model::Custom;
    Rational hbar;
};
json to_json(const FockMatrix& A, Model model, const Rational& hbar);
FockMatrixFile fock_from_json(const json& j);

// {"N":int, "source_block":[bm, bn], "target_block":[ai, aj],
//  "entries":[{"m":.., "n":.., "i":.., "j":.., "c":"p/q", "radicand":"p/q"}]}
// with the square-root part of every entry kept explicit.
json to_json(const TransitionMatrix& T);
TransitionMatrix transition_from_json(const json& j);

// {"q":"p/q", "pi_pow":int}
json to_json(const PiRational& v);
PiRational pi_rational_from_json(const json& j);

}  // namespace kstar::io
