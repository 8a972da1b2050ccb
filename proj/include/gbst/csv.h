#ifndef GBST_CSV_H_
#define GBST_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace gbst {

/*! \brief header plus rows of raw cells, every row as wide as the header */
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/*!
 * \brief parse RFC 4180 text: quoted fields may hold commas, doubled quotes
 *        and line breaks; CRLF and LF line endings are accepted.
 * \throws DataError on ragged rows, unterminated quotes or a missing header.
 */
CsvTable ParseCsv(std::string_view text);

/*! \throws DataError when the file is unreadable or malformed */
CsvTable ReadCsv(const std::string& path);

/*! \brief quote a field if it contains a comma, quote or line break */
std::string EscapeCsvField(std::string_view field);

}  // namespace gbst

#endif  // GBST_CSV_H_
