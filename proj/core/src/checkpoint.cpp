#include "pinnlab/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pinnlab {

namespace {

void write_spec(std::ostream& os, const NetworkSpec& s) {
    os << "variant " << to_string(s.variant) << "\n"
       << "coord_dim " << s.coord_dim << "\n"
       << "mu_dim " << s.mu_dim << "\n"
       << "hidden " << s.hidden << "\n"
       << "layers " << s.layers << "\n"
       << "dp " << s.dp << "\n"
       << "dc " << s.dc << "\n"
       << "dg " << s.dg << "\n"
       << "hidden_p " << s.hidden_p << "\n";
}

std::string expect_key(std::istream& is, const std::string& key) {
    std::string k, v;
    if (!(is >> k >> v)) throw IoError("checkpoint: truncated header");
    if (k != key) throw IoError("checkpoint: expected key '" + key + "', got '" + k + "'");
    return v;
}

NetworkSpec read_spec(std::istream& is) {
    NetworkSpec s;
    s.variant = variant_from_string(expect_key(is, "variant"));
    s.coord_dim = std::stoi(expect_key(is, "coord_dim"));
    s.mu_dim = std::stoi(expect_key(is, "mu_dim"));
    s.hidden = std::stoi(expect_key(is, "hidden"));
    s.layers = std::stoi(expect_key(is, "layers"));
    s.dp = std::stoi(expect_key(is, "dp"));
    s.dc = std::stoi(expect_key(is, "dc"));
    s.dg = std::stoi(expect_key(is, "dg"));
    s.hidden_p = std::stoi(expect_key(is, "hidden_p"));
    return s;
}

}  // namespace

void save_checkpoint(const NetworkWeights& w, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("checkpoint: cannot open for writing: " + path.string());
    os << "pinnlab-checkpoint " << kCheckpointVersion << "\n";
    write_spec(os, w.spec);
    os << "params " << w.theta.size() << "\n";
    char buf[40];
    for (Index i = 0; i < w.theta.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", w.theta[i]);
        os << buf << "\n";
    }
    os << "end\n";
    if (!os) throw IoError("checkpoint: write failure: " + path.string());
}

NetworkWeights load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("checkpoint: cannot open: " + path.string());
    std::string magic;
    int version = -1;
    if (!(is >> magic >> version)) throw IoError("checkpoint: parse error in header");
    if (magic != "pinnlab-checkpoint")
        throw IoError("checkpoint: not a pinnlab checkpoint: " + path.string());
    if (version != kCheckpointVersion)
        throw IoError("checkpoint: unsupported version " + std::to_string(version));

    NetworkWeights w;
    w.spec = read_spec(is);
    const Index expected = count_params(w.spec);
    const Index stored = std::stoll(expect_key(is, "params"));
    if (stored != expected)
        throw IoError("checkpoint: parameter count " + std::to_string(stored) +
                      " does not match spec (" + std::to_string(expected) + ")");

    w.layer = layer_table(w.spec, &w.p_count, &w.c_count, &w.g_count);
    w.theta.resize(expected);
    for (Index i = 0; i < expected; ++i) {
        if (!(is >> w.theta[i]))
            throw IoError("checkpoint: truncated at parameter " + std::to_string(i));
    }
    std::string tail;
    if (!(is >> tail) || tail != "end")
        throw IoError("checkpoint: missing end marker");
    return w;
}

}  // namespace pinnlab
