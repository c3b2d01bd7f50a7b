#include "solarcast/model_io.hpp"

#include "solarcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace solarcast {

namespace {

constexpr const char* kMagic = "solarcast-model";

std::string_view strip(std::string_view s) {
	while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) {
		s.remove_suffix(1);
	}
	while (!s.empty() && s.front() == ' ') {
		s.remove_prefix(1);
	}
	return s;
}

double parse_double(std::string_view text, const std::string& context) {
	double v = 0.0;
	if (text == "nan") {
		return std::numeric_limits<double>::quiet_NaN();
	}
	auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
	if (ec != std::errc{} || ptr != text.data() + text.size()) {
		throw DataError(context + ": cannot parse number '" + std::string(text) + "'");
	}
	return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
	std::vector<std::string_view> out;
	std::size_t start = 0;
	while (true) {
		const auto pos = line.find(sep, start);
		out.push_back(line.substr(start, pos - start));
		if (pos == std::string_view::npos) {
			break;
		}
		start = pos + 1;
	}
	return out;
}

} // namespace

std::string format_exact(double value) {
	if (std::isnan(value)) {
		return "nan";
	}
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", value);
	return buf;
}

void ModelFile::set(const std::string& key, const std::string& value) {
	if (key.empty() || key.find('=') != std::string::npos || value.find('\n') != std::string::npos) {
		throw ConfigError("invalid model file entry '" + key + "'");
	}
	auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
	if (it != entries_.end()) {
		it->second = value;
	} else {
		entries_.emplace_back(key, value);
	}
}

void ModelFile::set(const std::string& key, double value) {
	set(key, format_exact(value));
}

void ModelFile::set(const std::string& key, long long value) {
	set(key, std::to_string(value));
}

bool ModelFile::has(const std::string& key) const {
	return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& ModelFile::get(const std::string& key) const {
	auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
	if (it == entries_.end()) {
		throw DataError("model file has no entry '" + key + "'");
	}
	return it->second;
}

double ModelFile::get_double(const std::string& key) const {
	return parse_double(get(key), "model file entry '" + key + "'");
}

long long ModelFile::get_int(const std::string& key) const {
	const auto& s = get(key);
	long long v = 0;
	auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
	if (ec != std::errc{} || ptr != s.data() + s.size()) {
		throw DataError("model file entry '" + key + "' is not an integer: '" + s + "'");
	}
	return v;
}

void ModelFile::add_block(Block block) {
	for (const auto& row : block.rows) {
		if (row.size() != block.header.size()) {
			throw DataError("model block '" + block.name + "' row width does not match its header");
		}
	}
	blocks_.push_back(std::move(block));
}

bool ModelFile::has_block(const std::string& name) const {
	return std::any_of(blocks_.begin(), blocks_.end(), [&](const Block& b) { return b.name == name; });
}

const ModelFile::Block& ModelFile::block(const std::string& name) const {
	auto it = std::find_if(blocks_.begin(), blocks_.end(), [&](const Block& b) { return b.name == name; });
	if (it == blocks_.end()) {
		throw DataError("model file has no block '" + name + "'");
	}
	return *it;
}

void ModelFile::write(std::ostream& out) const {
	out << kMagic << ' ' << kVersion << '\n';
	for (const auto& [k, v] : entries_) {
		out << k << '=' << v << '\n';
	}
	for (const auto& b : blocks_) {
		out << "[block " << b.name << "]\n";
		for (std::size_t i = 0; i < b.header.size(); ++i) {
			out << (i ? "," : "") << b.header[i];
		}
		out << '\n';
		for (const auto& row : b.rows) {
			for (std::size_t i = 0; i < row.size(); ++i) {
				out << (i ? "," : "") << format_exact(row[i]);
			}
			out << '\n';
		}
		out << "[end]\n";
	}
}

ModelFile ModelFile::read(std::istream& in) {
	ModelFile f;
	std::string line;
	std::size_t line_no = 0;
	auto where = [&]() { return "model file line " + std::to_string(line_no); };

	while (std::getline(in, line)) {
		++line_no;
		const auto t = strip(line);
		if (t.empty() || t.front() == '#') {
			continue;
		}
		const std::string expected = std::string(kMagic) + " " + std::to_string(kVersion);
		if (t != expected) {
			throw DataError(where() + ": expected '" + expected + "', got '" + std::string(t) + "'");
		}
		break;
	}
	if (line_no == 0) {
		throw DataError("empty model file");
	}

	Block* open = nullptr;
	bool need_header = false;
	while (std::getline(in, line)) {
		++line_no;
		const auto t = strip(line);
		if (t.empty() || t.front() == '#') {
			continue;
		}
		if (open) {
			if (t == "[end]") {
				open = nullptr;
				continue;
			}
			const auto fields = split(t, ',');
			if (need_header) {
				for (auto h : fields) {
					open->header.emplace_back(h);
				}
				need_header = false;
				continue;
			}
			if (fields.size() != open->header.size()) {
				throw DataError(where() + ": expected " + std::to_string(open->header.size()) + " fields");
			}
			std::vector<double> row;
			row.reserve(fields.size());
			for (auto field : fields) {
				row.push_back(parse_double(field, where()));
			}
			open->rows.push_back(std::move(row));
			continue;
		}
		if (t.starts_with("[block ") && t.ends_with("]")) {
			f.blocks_.push_back({std::string(t.substr(7, t.size() - 8)), {}, {}});
			open = &f.blocks_.back();
			need_header = true;
			continue;
		}
		const auto eq = t.find('=');
		if (eq == std::string_view::npos) {
			throw DataError(where() + ": expected key=value");
		}
		f.set(std::string(t.substr(0, eq)), std::string(t.substr(eq + 1)));
	}
	if (open) {
		throw DataError("model file ends inside block '" + open->name + "'");
	}
	return f;
}

void ModelFile::save(const std::string& path) const {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw DataError("cannot write '" + path + "'");
	}
	write(out);
}

ModelFile ModelFile::load(const std::string& path) {
	std::ifstream in(path);
	if (!in) {
		throw DataError("cannot open '" + path + "'");
	}
	return read(in);
}

} // namespace solarcast
