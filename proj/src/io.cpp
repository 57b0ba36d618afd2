#include "deltabox/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "deltabox/errors.hpp"

namespace deltabox::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) {
        out.push_back(trim(field));
    }
    return out;
}

double to_double(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw InputError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
}

int to_int(const std::string& s, int line_no) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InputError("line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
    }
    return v;
}

// Fills a[k-1] from "k,re,im" rows, skipping comments and non-numeric headers.
void fill_rows(const std::string& text, Eigen::VectorXcd& a) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 3) {
            throw InputError("line " + std::to_string(line_no) + ": expected k,re,im");
        }
        if (f[0] == "k") {
            continue;
        }
        const int k = to_int(f[0], line_no);
        if (k < 1 || k > a.size()) {
            throw InputError("line " + std::to_string(line_no) + ": mode " + f[0] +
                             " outside 1.." + std::to_string(a.size()));
        }
        a[k - 1] = cplx(to_double(f[1], line_no), to_double(f[2], line_no));
    }
}

} // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing: " + std::strerror(errno));
        }
        out << content;
        out.flush();
        if (!out) {
            throw IoError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_state(const SpectralCoefficients& c, const std::string& comment) {
    std::string out = "# k_max=" + std::to_string(c.k_max()) + "\n";
    if (!comment.empty()) {
        out += "# " + comment + "\n";
    }
    char buf[96];
    for (int k = 1; k <= c.k_max(); ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", k, c[k].real(), c[k].imag());
        out += buf;
    }
    return out;
}

SpectralCoefficients parse_state(const std::string& text) {
    const std::string key = "# k_max=";
    const auto first_end = text.find('\n');
    const std::string first = trim(text.substr(0, first_end));
    if (first.rfind(key, 0) != 0) {
        throw InputError("state file must start with '# k_max=<int>'");
    }
    const int k_max = to_int(trim(first.substr(key.size())), 1);
    if (k_max < 1) {
        throw InputError("state file declares k_max < 1");
    }
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(k_max);
    fill_rows(text, a);
    return SpectralCoefficients(std::move(a));
}

void write_state(const std::filesystem::path& path, const SpectralCoefficients& c,
                 const std::string& comment) {
    write_atomic(path, format_state(c, comment));
}

SpectralCoefficients read_state(const std::filesystem::path& path) { return parse_state(read_text(path)); }

SpectralCoefficients parse_coefficient_table(const std::string& text, int k_max) {
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(k_max);
    fill_rows(text, a);
    return SpectralCoefficients(std::move(a));
}

} // namespace deltabox::io
