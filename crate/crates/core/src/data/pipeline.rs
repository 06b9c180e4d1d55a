use super::{resize_bilinear, stratified_split, DataError, FeatureCache, GrayImage, Matrix, MinMaxScaler, PcaModel};

/// Every image is resampled to `IMAGE_SIDE x IMAGE_SIDE` before PCA.
pub const IMAGE_SIDE: usize = 64;

/// Resizes each image to `side x side` and flattens it into one matrix row.
pub fn images_to_matrix<'a>(
    images: impl ExactSizeIterator<Item = &'a GrayImage>,
    side: usize,
) -> Result<Matrix, DataError> {
    let rows = images.len();
    let mut data = Vec::with_capacity(rows * side * side);
    for img in images {
        let resized = if img.width() == side && img.height() == side {
            img.clone()
        } else {
            resize_bilinear(img, side, side)?
        };
        data.extend(resized.pixels().iter().map(|&p| f64::from(p)));
    }
    Matrix::new(rows, side * side, data)
}

/// Scaled train/test features plus the fitted transforms.
#[derive(Debug, Clone)]
pub struct PreparedFeatures {
    pub train: FeatureCache,
    pub test: FeatureCache,
    pub pca: PcaModel,
    pub scaler: MinMaxScaler,
}

/// Stratified split, PCA with `num_components` fitted on the training rows
/// only, then min-max scaling (also fitted on training rows) onto `[0, pi/2]`.
///
/// `rows_for(indices)` materialises pixel rows lazily so only the selected
/// samples are ever resized.
pub fn prepare_features(
    labels: &[u8],
    n_train: usize,
    n_test: usize,
    num_components: usize,
    seed: u64,
    rows_for: impl Fn(&[usize]) -> Result<Matrix, DataError>,
) -> Result<PreparedFeatures, DataError> {
    if n_train == 0 || n_test == 0 {
        return Err(DataError::Invalid("train and test sizes must be positive".into()));
    }
    let (train_idx, test_idx) = stratified_split(labels, n_train, n_test, seed)?;
    let train_raw = rows_for(&train_idx)?;
    let test_raw = rows_for(&test_idx)?;

    let pca = PcaModel::fit(&train_raw, num_components)?;
    let train_proj = pca.transform(&train_raw)?;
    let test_proj = pca.transform(&test_raw)?;
    let scaler = MinMaxScaler::fit(&train_proj)?;

    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<u8>>();
    Ok(PreparedFeatures {
        train: FeatureCache::new(scaler.transform(&train_proj)?, pick(&train_idx))?,
        test: FeatureCache::new(scaler.transform(&test_proj)?, pick(&test_idx))?,
        pca,
        scaler,
    })
}
