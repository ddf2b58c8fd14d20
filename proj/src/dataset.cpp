#include "gaitgender/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include "gaitgender/error.hpp"
#include "gaitgender/image_io.hpp"

namespace gaitgender {

namespace fs = std::filesystem;

namespace {

class FileFrames final : public FrameSource {
 public:
  explicit FileFrames(std::vector<fs::path> paths) : paths_(std::move(paths)) {}
  std::size_t size() const override { return paths_.size(); }
  RawSilhouette load(std::size_t index) const override { return read_silhouette(paths_.at(index)); }
  std::string frame_id(std::size_t index) const override { return paths_.at(index).string(); }

 private:
  std::vector<fs::path> paths_;
};

std::vector<fs::directory_entry> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::directory_entry> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : e.is_regular_file()) out.push_back(e);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

int parse_gender(const std::string& token, const std::string& subject) {
  const std::string g = lower(token);
  if (g == "m" || g == "male" || g == "+1" || g == "1") return kMale;
  if (g == "f" || g == "female" || g == "-1") return kFemale;
  throw Error(ErrorCode::UnknownGender, "subject " + subject + ": unrecognised gender '" + token + "'");
}

}  // namespace

std::map<std::string, int> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingManifest, "cannot read manifest " + path.string());
  std::map<std::string, int> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string subject;
    std::string gender;
    if (!(fields >> subject)) continue;
    if (!(fields >> gender)) {
      throw Error(ErrorCode::UnknownGender, "subject " + subject + ": no gender in manifest");
    }
    out[subject] = parse_gender(gender, subject);
  }
  return out;
}

Dataset ingest(const fs::path& root, const fs::path& manifest) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, "not a directory: " + root.string());
  const auto subjects = sorted_entries(root, true);
  Dataset out;
  if (subjects.empty()) return out;
  const auto genders = read_manifest(manifest);

  static const std::regex kSequence(R"((nm|bg|cl)-(\d+))");
  static const std::regex kView(R"(\d{3})");
  static const std::regex kFrame(R"(.*?(\d+))");
  for (const auto& subject_dir : subjects) {
    const std::string subject = subject_dir.path().filename().string();
    const auto g = genders.find(subject);
    if (g == genders.end()) {
      throw Error(ErrorCode::UnknownGender, "subject " + subject + " is not in the manifest");
    }
    for (const auto& seq_dir : sorted_entries(subject_dir.path(), true)) {
      std::smatch m;
      const std::string seq_name = seq_dir.path().filename().string();
      if (!std::regex_match(seq_name, m, kSequence)) continue;
      const Condition condition = parse_condition(m[1].str());
      const int index = std::stoi(m[2].str());
      for (const auto& view_dir : sorted_entries(seq_dir.path(), true)) {
        const std::string view_name = view_dir.path().filename().string();
        if (!std::regex_match(view_name, kView)) continue;
        std::vector<fs::path> frames;
        long previous = -1;
        for (const auto& f : sorted_entries(view_dir.path(), false)) {
          const std::string ext = lower(f.path().extension().string());
          if (ext != ".png" && ext != ".pgm") continue;
          const std::string stem = f.path().stem().string();
          std::smatch fm;
          if (!std::regex_match(stem, fm, kFrame)) {
            throw Error(ErrorCode::FrameOrder, f.path().string() + ": no frame number in file name");
          }
          const long number = std::stol(fm[1].str());
          if (number <= previous) {
            throw Error(ErrorCode::FrameOrder, f.path().string() + ": frame number " +
                                                   std::to_string(number) + " out of order");
          }
          previous = number;
          frames.push_back(f.path());
        }
        Sequence s;
        s.subject = subject;
        s.gender = g->second;
        s.condition = condition;
        s.index = index;
        s.view = std::stoi(view_name);
        s.frames = std::make_shared<FileFrames>(std::move(frames));
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

Dataset ingest(const fs::path& root) { return ingest(root, root / "manifest.txt"); }

void export_dataset(const Dataset& dataset, const fs::path& root) {
  fs::create_directories(root);
  std::map<std::string, int> genders;
  for (const Sequence& s : dataset) {
    genders[s.subject] = s.gender;
    const std::string cond = s.condition == Condition::Normal ? "nm"
                             : s.condition == Condition::Bag  ? "bg"
                                                              : "cl";
    char seq_name[16];
    char view_name[16];
    std::snprintf(seq_name, sizeof seq_name, "%s-%02d", cond.c_str(), s.index);
    std::snprintf(view_name, sizeof view_name, "%03d", s.view);
    const fs::path dir = root / s.subject / seq_name / view_name;
    fs::create_directories(dir);
    if (!s.frames) continue;
    for (std::size_t i = 0; i < s.frames->size(); ++i) {
      char name[96];
      std::snprintf(name, sizeof name, "%s-%s-%s-%03zu.png", s.subject.c_str(), seq_name, view_name, i + 1);
      write_silhouette(dir / name, s.frames->load(i).mask());
    }
  }
  std::ofstream manifest(root / "manifest.txt");
  if (!manifest) throw Error(ErrorCode::IoError, "cannot write manifest in " + root.string());
  manifest << "# subject gender\n";
  for (const auto& [subject, gender] : genders) {
    manifest << subject << ' ' << (gender == kMale ? 'M' : 'F') << '\n';
  }
}

}  // namespace gaitgender
