#ifndef GBST_FILE_UTIL_H_
#define GBST_FILE_UTIL_H_

#include <string>
#include <utility>
#include <vector>

namespace gbst {

/*! \throws DataError when the file cannot be read */
std::string ReadFile(const std::string& path);

/*! \brief write to a sibling temp file, then rename over `path` */
void WriteFileAtomic(const std::string& path, const std::string& content);

/*!
 * \brief write several files all-or-nothing: every temp file is written
 *        before the first rename, and temps are removed on failure.
 */
void WriteFilesAtomic(const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace gbst

#endif  // GBST_FILE_UTIL_H_
