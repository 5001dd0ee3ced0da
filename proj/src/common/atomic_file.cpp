#include "conrad/atomic_file.hpp"

#include <atomic>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "conrad/error.hpp"

namespace conrad {

namespace fs = std::filesystem;

namespace {
std::atomic<unsigned long> temp_counter{0};
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    const fs::path parent = path.parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        fs::create_directories(parent, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create directory " + parent.string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(temp_counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw Error(ErrorKind::Io, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

void write_file_atomic(const fs::path& path, std::span<const std::byte> bytes) {
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::string data;
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size < 0) throw Error(ErrorKind::Io, "cannot size " + path.string());
    data.resize(static_cast<std::size_t>(size));
    in.seekg(0, std::ios::beg);
    in.read(data.data(), size);
    if (!in) throw Error(ErrorKind::Io, "read of " + path.string() + " failed");
    return data;
}

}  // namespace conrad
