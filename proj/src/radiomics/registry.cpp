#include "conrad/radiomics.hpp"

namespace conrad::radiomics {

// Column order of the radiomics CSV. docs/feature_dictionary.md documents
// every entry; changing this list requires bumping kRegistryVersion.
const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        auto add = [&](std::string_view family, std::initializer_list<std::string_view> items) {
            for (auto item : items) n.push_back(std::string(family) + "." + std::string(item));
        };
        add("firstorder", {"Energy", "TotalEnergy", "Entropy", "Minimum", "10Percentile", "90Percentile", "Maximum",
                           "Mean", "Median", "InterquartileRange", "Range", "MeanAbsoluteDeviation",
                           "RobustMeanAbsoluteDeviation", "RootMeanSquared", "Skewness", "Kurtosis", "Variance",
                           "Uniformity"});
        add("shape", {"MeshVolume", "VoxelVolume", "SurfaceArea", "SurfaceVolumeRatio", "Sphericity",
                      "Maximum3DDiameter", "Maximum2DDiameterSlice", "Maximum2DDiameterColumn",
                      "Maximum2DDiameterRow", "MajorAxisLength", "MinorAxisLength", "LeastAxisLength", "Elongation",
                      "Flatness"});
        add("glcm", {"Autocorrelation", "JointAverage", "ClusterProminence", "ClusterShade", "ClusterTendency",
                     "Contrast", "Correlation", "DifferenceAverage", "DifferenceEntropy", "DifferenceVariance",
                     "JointEnergy", "JointEntropy", "Imc1", "Imc2", "Idm", "Idmn", "Id", "Idn", "InverseVariance",
                     "MaximumProbability", "MCC", "SumAverage", "SumEntropy", "SumSquares"});
        add("glrlm", {"ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity",
                      "GrayLevelNonUniformityNormalized", "RunLengthNonUniformity",
                      "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance", "RunVariance",
                      "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
                      "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
                      "LongRunHighGrayLevelEmphasis"});
        add("glszm", {"SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformity",
                      "GrayLevelNonUniformityNormalized", "SizeZoneNonUniformity", "SizeZoneNonUniformityNormalized",
                      "ZonePercentage", "GrayLevelVariance", "ZoneVariance", "ZoneEntropy",
                      "LowGrayLevelZoneEmphasis", "HighGrayLevelZoneEmphasis", "SmallAreaLowGrayLevelEmphasis",
                      "SmallAreaHighGrayLevelEmphasis", "LargeAreaLowGrayLevelEmphasis",
                      "LargeAreaHighGrayLevelEmphasis"});
        add("ngtdm", {"Coarseness", "Contrast", "Busyness", "Complexity", "Strength"});
        add("gldm", {"SmallDependenceEmphasis", "LargeDependenceEmphasis", "GrayLevelNonUniformity",
                     "DependenceNonUniformity", "DependenceNonUniformityNormalized", "GrayLevelVariance",
                     "DependenceVariance", "DependenceEntropy", "LowGrayLevelEmphasis", "HighGrayLevelEmphasis",
                     "SmallDependenceLowGrayLevelEmphasis", "SmallDependenceHighGrayLevelEmphasis",
                     "LargeDependenceLowGrayLevelEmphasis", "LargeDependenceHighGrayLevelEmphasis"});
        return n;
    }();
    return names;
}

}  // namespace conrad::radiomics
