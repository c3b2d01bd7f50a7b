#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace solarcast {

/// Plain-text model container.
///
///     solarcast-model 1
///     model=mlp
///     preprocess=1
///     [block factors]
///     day,y_star,n_years
///     1,0.93812...,18
///     ...
///     [end]
///
/// Scalars are `key=value` lines, tables are named CSV blocks with a header
/// row. Numbers are written with 17 significant digits so a save/load cycle
/// reproduces every double exactly. Lines starting with '#' are comments.
class ModelFile {
public:
	static constexpr int kVersion = 1;

	struct Block {
		std::string name;
		std::vector<std::string> header;
		std::vector<std::vector<double>> rows;
	};

	void set(const std::string& key, const std::string& value);
	void set(const std::string& key, double value);
	void set(const std::string& key, long long value);

	bool has(const std::string& key) const;
	/// Throws DataError for a missing key or unparsable number.
	const std::string& get(const std::string& key) const;
	double get_double(const std::string& key) const;
	long long get_int(const std::string& key) const;

	void add_block(Block block);
	bool has_block(const std::string& name) const;
	const Block& block(const std::string& name) const;

	void write(std::ostream& out) const;
	static ModelFile read(std::istream& in);
	void save(const std::string& path) const;
	static ModelFile load(const std::string& path);

private:
	std::vector<std::pair<std::string, std::string>> entries_;
	std::vector<Block> blocks_;
};

/// %.17g
std::string format_exact(double value);

} // namespace solarcast
