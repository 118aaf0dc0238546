#include "tenq/fileio.hpp"

#include <fstream>
#include <sstream>

#include "tenq/error.hpp"

namespace tenq {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& p, std::string_view data) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void append_line(const fs::path& p, std::string_view line) {
    std::ofstream out(p, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + p.string());
    out << line << '\n';
    if (!out) throw IoError("short write to " + p.string());
}

}  // namespace tenq
