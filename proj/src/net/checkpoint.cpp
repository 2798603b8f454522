#include "featlab/net/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace featlab::net {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out << "PINN-FEATLAB-CHECKPOINT 1\n";
    for (const auto& s : store.slices())
        out << "slice " << s.name << ' ' << s.offset << ' ' << s.len << '\n';
    out << "data " << store.size() << '\n';
    auto v = store.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "PINN-FEATLAB-CHECKPOINT 1")
        throw std::runtime_error("bad checkpoint header in " + path.string());

    std::vector<Slice> slices;
    std::size_t total = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "slice") {
            Slice s;
            ls >> s.name >> s.offset >> s.len;
            if (!ls) throw std::runtime_error("bad slice line in " + path.string());
            slices.push_back(s);
        } else if (tag == "data") {
            ls >> total;
            break;
        } else {
            throw std::runtime_error("bad checkpoint line in " + path.string());
        }
    }
    ParamStore store(slices);
    if (store.size() != total) throw std::runtime_error("checkpoint size mismatch in " + path.string());
    auto v = store.values();
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint " + path.string());
    return store;
}

}  // namespace featlab::net
